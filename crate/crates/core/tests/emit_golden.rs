use powerarith::formula::emit::{emit_t, emit_tforall, AxiomStream, EmitParams};

fn params() -> EmitParams {
    EmitParams { cong_max: 3, car_m_max: 1, e_max: 5, mann_arity_max: 1, ..EmitParams::default() }
}

fn render(stream: AxiomStream) -> String {
    stream.map(|ax| ax.unwrap().to_json_line() + "\n").collect()
}

#[test]
fn t_stream_matches_golden() {
    let got = render(emit_t(&[2, 3], &params()).unwrap());
    assert_eq!(got, include_str!("golden/t_2_3.jsonl"));
}

#[test]
fn tforall_stream_matches_golden() {
    let got = render(emit_tforall(&[2, 3], &params()).unwrap());
    assert_eq!(got, include_str!("golden/tforall_2_3.jsonl"));
}

#[test]
fn streams_are_reproducible() {
    let p = EmitParams::default();
    assert_eq!(render(emit_tforall(&[2, 3], &p).unwrap()), render(emit_tforall(&[2, 3], &p).unwrap()));
}
