//! Convergence envelopes from the truncated stochastic Gronwall inequality,
//! and a direct numeric check of the discrete recursion behind it.
//!
//! The constants `C`, `C(T)`, `C₁` and `η` are existential in the analysis;
//! here they are knobs (default 1), so the envelopes compare shapes rather
//! than certify absolute bounds.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailType {
    /// `ℙ(Ω^c) ≤ C₁ R^{-p₁}`
    Poly,
    /// `ℙ(Ω^c) ≤ C₁ exp(−η R^{2σ₂})`
    Exp,
    /// `ℙ(Ω^c) ≤ C₁ log^{-p₁} R`
    LogLog,
}

impl TailType {
    pub fn name(self) -> &'static str {
        match self {
            TailType::Poly => "poly",
            TailType::Exp => "exp",
            TailType::LogLog => "loglog",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GronwallParams {
    /// One-step aggregate error scale `ε_N`.
    pub epsilon: f64,
    pub c: f64,
    /// `C(T)`
    pub c_t: f64,
    pub c1: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub p: f64,
    pub l: f64,
    pub p1: f64,
    pub eta: f64,
    pub kappa: f64,
    /// `C′`
    pub c_prime: f64,
    /// Exponent loss `γ₁ ∈ (0,1)` of the exponential-tail bound when `σ₁ < σ₂`.
    pub gamma1: Option<f64>,
}

impl Default for GronwallParams {
    fn default() -> Self {
        GronwallParams {
            epsilon: 1e-4,
            c: 1.0,
            c_t: 1.0,
            c1: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            p: 1.0,
            l: 2.0,
            p1: 1.0,
            eta: 1.0,
            kappa: 2.0,
            c_prime: 0.0,
            gamma1: None,
        }
    }
}

impl GronwallParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool); 11] = [
            ("epsilon", self.epsilon >= 0.0),
            ("C", self.c > 0.0),
            ("C(T)", self.c_t > 0.0),
            ("C1", self.c1 > 0.0),
            ("sigma1", self.sigma1 >= 0.0),
            ("sigma2", self.sigma2 > 0.0),
            ("p", self.p >= 1.0),
            ("l", self.l > 1.0),
            ("p1", self.p1 >= 1.0),
            ("eta", self.eta > 0.0),
            ("kappa", self.kappa > 1.0),
        ];
        for (name, ok) in checks {
            if !ok {
                return Err(Error::config(format!("Gronwall parameter {name} out of range")));
            }
        }
        if !(self.c_prime >= 0.0) {
            return Err(Error::config("Gronwall parameter C' must be nonnegative"));
        }
        if let Some(g) = self.gamma1 {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::config("gamma1 must lie in (0, 1)"));
            }
        }
        Ok(())
    }

    fn pl(&self) -> f64 {
        self.p * self.l
    }

    /// `2 C C₁^{1/(pl)}`
    fn prefactor(&self) -> f64 {
        2.0 * self.c * self.c1.powf(1.0 / self.pl())
    }

    /// `log((ε + ε^{1/2})^{-1})`, required positive.
    fn log_inverse(&self) -> Result<f64> {
        let x = self.epsilon + self.epsilon.sqrt();
        let v = -x.ln();
        if !(v > 0.0) || !v.is_finite() {
            return Err(too_large(self.epsilon));
        }
        Ok(v)
    }
}

fn too_large(epsilon: f64) -> Error {
    Error::Domain(format!("epsilon_N = {epsilon} too large for asymptotic bound"))
}

/// Value of the strong-error envelope for the given tail type.
pub fn bound_rate(params: &GronwallParams, tail: TailType) -> Result<f64> {
    params.validate()?;
    let pl = params.pl();
    match tail {
        TailType::Poly => {
            if params.sigma1 == 0.0 {
                return Err(Error::Domain("polynomial envelope needs sigma1 > 0".into()));
            }
            let base = params.log_inverse()? / (params.kappa * params.c_t);
            Ok(params.prefactor() * base.powf(-params.p1 / (2.0 * params.sigma1 * pl)))
        }
        TailType::Exp => {
            if params.sigma1 < params.sigma2 {
                let g = params
                    .gamma1
                    .ok_or_else(|| Error::config("exp envelope with sigma1 < sigma2 needs gamma1"))?;
                params.log_inverse()?;
                return Ok(params.c * params.epsilon.powf(1.0 - g));
            }
            exp_envelope(params)
        }
        TailType::LogLog => {
            let inner = params.log_inverse()? - (params.kappa * params.c_t).ln();
            if !(inner > 1.0) {
                return Err(too_large(params.epsilon));
            }
            Ok(params.prefactor()
                * (2.0 * params.sigma1).powf(params.p1 / pl)
                * inner.ln().powf(-params.p1 / pl))
        }
    }
}

/// `2CC₁^{1/(pl)} exp(−(η/(pl)) (log((ε+ε^{1/2})^{-1})/C(T))^{σ₂/σ₁})`, the
/// exponential-tail envelope before the bootstrap for `σ₁ < σ₂`.
pub fn exp_envelope(params: &GronwallParams) -> Result<f64> {
    params.validate()?;
    if params.sigma1 == 0.0 {
        return Err(Error::Domain("exponential envelope needs sigma1 > 0".into()));
    }
    let base = params.log_inverse()? / params.c_t;
    Ok(params.prefactor() * (-(params.eta / params.pl()) * base.powf(params.sigma2 / params.sigma1)).exp())
}

/// Outcome of [`check_gronwall_recursion`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GronwallVerdict {
    /// Hypothesis held throughout; the conclusion holds with the given
    /// minimum slack `RHS − a_n`.
    Holds { slack: f64, rhs: f64 },
    /// Hypothesis held but the conclusion failed at `index`.
    Violated { index: usize, slack: f64, rhs: f64 },
    /// The sequence does not satisfy the hypothesis at `index`; no verdict.
    HypothesisViolated { index: usize },
}

/// Inputs of the deterministic form of the truncated Gronwall recursion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recursion {
    pub dt: f64,
    pub r1: f64,
    pub sigma1: f64,
    pub c: f64,
    pub c_prime: f64,
    pub epsilon: f64,
    pub p: f64,
    pub l: f64,
}

impl Recursion {
    /// `C(1 + R₁^{2σ₁})`
    pub fn growth(&self) -> f64 {
        self.c * (1.0 + self.r1.powf(2.0 * self.sigma1))
    }

    /// `ε + C′ ε^{1/2} sup_k ℙ_k^{1/(pl)}`
    pub fn forcing(&self, tail_sup: f64) -> f64 {
        self.epsilon + self.c_prime * self.epsilon.sqrt() * tail_sup.powf(1.0 / (self.p * self.l))
    }

    /// `C(T) = C T (1 + R₁^{2σ₁}) / R₁^{2σ₁}`, so that `C(T) R₁^{2σ₁} = C(1+R₁^{2σ₁})T`.
    pub fn c_t(&self, horizon: f64) -> f64 {
        self.growth() * horizon / self.r1.powf(2.0 * self.sigma1)
    }
}

/// Checks the conclusion
/// `a_n ≤ exp(C(T)R₁^{2σ₁})(ε + C′ε^{1/2} sup ℙ^{1/(pl)}) + C sup ℙ^{1/(pl)}`
/// on a sequence satisfying `a_0 ≤ ε + C′ε^{1/2} sup ℙ^{1/(pl)}` and
/// `a_{n+1} ≤ C(1+R₁^{2σ₁}) δt Σ_{k≤n} a_k + ε + C′ε^{1/2} sup ℙ^{1/(pl)}`.
/// `tail_probabilities[k]` is `ℙ((Ω_{R₁}^k)^c)`.
pub fn check_gronwall_recursion(a: &[f64], rec: &Recursion, tail_probabilities: &[f64]) -> Result<GronwallVerdict> {
    if a.is_empty() {
        return Err(Error::config("empty sequence"));
    }
    if a.iter().any(|&x| !(x >= 0.0)) {
        return Err(Error::Domain("sequence must be nonnegative".into()));
    }
    if tail_probabilities.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
        return Err(Error::Domain("tail probabilities must lie in [0, 1]".into()));
    }
    let tail_sup = tail_probabilities.iter().copied().fold(0.0, f64::max);
    let beta = rec.forcing(tail_sup);
    let k = rec.growth() * rec.dt;
    let horizon = (a.len() - 1) as f64 * rec.dt;
    let rhs = (k / rec.dt * horizon).exp() * beta + rec.c * tail_sup.powf(1.0 / (rec.p * rec.l));

    if a[0] > beta {
        return Ok(GronwallVerdict::HypothesisViolated { index: 0 });
    }
    let mut partial = 0.0;
    for n in 0..a.len() - 1 {
        partial += a[n];
        if a[n + 1] > k * partial + beta {
            return Ok(GronwallVerdict::HypothesisViolated { index: n + 1 });
        }
    }
    let (index, slack) = a
        .iter()
        .map(|&x| rhs - x)
        .enumerate()
        .fold((0, f64::INFINITY), |acc, (i, s)| if s < acc.1 { (i, s) } else { acc });
    Ok(if slack >= 0.0 {
        GronwallVerdict::Holds { slack, rhs }
    } else {
        GronwallVerdict::Violated { index, slack, rhs }
    })
}

/// The sequence meeting every hypothesis inequality with equality.
pub fn extremal_sequence(rec: &Recursion, tail_sup: f64, len: usize) -> Vec<f64> {
    let beta = rec.forcing(tail_sup);
    let k = rec.growth() * rec.dt;
    let mut out = Vec::with_capacity(len);
    let mut partial = 0.0;
    for n in 0..len {
        let a = if n == 0 { beta } else { k * partial + beta };
        partial += a;
        out.push(a);
    }
    out
}
