use proptest::prelude::*;
use snls::config::{parse_config, render};

fn document(modes_log: u32, m: usize, sigma: u32, lambda: i32, steps: u32, paths: usize, seed: u64, scale: f64) -> String {
    let modes = 1usize << modes_log;
    format!(
        r#"
[basis]
domain = "torus"
modes = {modes}

[noise]
type = "multiplicative"
scale = {scale:?}

[scheme]
id = "semi-midpoint"
sigma = {sigma}
lambda = {lambda}
dt = 0.125
M = {m}

[run]
T = {T:?}
paths = {paths}
seed = {seed}
"#,
        m = m.min(modes),
        T = 0.125 * steps as f64,
    )
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(
        modes_log in 1u32..8,
        m in 1usize..128,
        sigma in 1u32..4,
        lambda in prop::sample::select(vec![-1, 0, 1]),
        steps in 1u32..1000,
        paths in 1usize..10_000,
        seed in any::<u64>(),
        scale in 0.0f64..100.0,
    ) {
        let cfg = parse_config(&document(modes_log, m, sigma, lambda, steps, paths, seed, scale)).unwrap();
        prop_assert_eq!(parse_config(&render(&cfg)).unwrap(), cfg);
    }
}
