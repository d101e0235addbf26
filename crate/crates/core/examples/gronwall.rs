//! Closed-form error envelopes and a numeric check of the discrete
//! truncated Gronwall recursion.

use snls::rates::{bound_rate, check_gronwall_recursion, extremal_sequence, GronwallParams, Recursion, TailType};

fn main() -> snls::Result<()> {
    let params = GronwallParams {
        sigma2: 2.0,
        p1: 4.0,
        gamma1: Some(0.1),
        ..Default::default()
    };
    println!("{:>8} {:>12} {:>12} {:>12}", "eps_N", "poly", "exp", "loglog");
    for e in [1e-4, 1e-8, 1e-16, 1e-32] {
        let p = GronwallParams { epsilon: e, ..params };
        let v = |t| bound_rate(&p, t).map_or("domain".to_string(), |x| format!("{x:.4e}"));
        println!("{e:>8.0e} {:>12} {:>12} {:>12}", v(TailType::Poly), v(TailType::Exp), v(TailType::LogLog));
    }

    let rec = Recursion {
        dt: 0.01,
        r1: 2.0,
        sigma1: 1.0,
        c: 1.0,
        c_prime: 0.5,
        epsilon: 1e-3,
        p: 1.0,
        l: 2.0,
    };
    let tails = vec![0.01; 101];
    let a = extremal_sequence(&rec, 0.01, 101);
    println!("extremal sequence: {:?}", check_gronwall_recursion(&a, &rec, &tails)?);
    let mut bad = a.clone();
    bad[40] *= 3.0;
    println!("perturbed sequence: {:?}", check_gronwall_recursion(&bad, &rec, &tails)?);
    Ok(())
}
