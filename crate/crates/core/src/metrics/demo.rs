//! Two end-to-end replays.
//!
//! `example_bound_replay` bounds the output drift of the divided-difference
//! term when its function argument moves from the identity to sine, and
//! compares the closed-form display bound against the derivative-built one.
//!
//! `replay_no_greatest` reproduces, with an empty primitive table, the
//! third-order counterexample showing the definable-observation relation is
//! maximal but not greatest: it computes the distance element `D` between
//! the constantly-zero functional `O` and the evaluate-at-zero functional
//! `Z` on a definable corpus, shows the self-distance of `J(F) = F(const 1)`
//! vanishes at `(O, D)`, and exhibits the violated ground triple `(0, 0, 1)`.

use serde::Serialize;

use crate::lambda::{parse, PrimitiveTable, SimpleType, TypingContext};
use crate::quantale::QuantaleValue;
use crate::semantics::{derive, eval, EvalCtx};
use crate::value::SemValue;
use crate::verdict::Verdict;

use super::{
    grid_sup, member_at, rho_hat_arrow, two_term_bound_err_fun, CarrierMode, Definable,
    MetricsError, SamplerConfig,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DemoError {
    #[error("the replay requires an empty primitive table, found {0} primitives")]
    NonEmptyPrims(usize),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReplay {
    pub eps: f64,
    pub radius: f64,
    /// The display-form bound: `max(radius/eps, sup_{|y| <= radius} |1 -
    /// (sin(y+eps) - sin y)/eps|)`, inner term grid-evaluated.
    pub bound: f64,
    /// `|F(id, 0) - F(sin, radius)|` computed by the interpreter.
    pub actual: f64,
    /// The same bound assembled from the term's error derivative applied at
    /// the estimated identity-to-sine distance.
    pub bound_via_derivative: f64,
    pub grid_resolution: usize,
}

/// Replays the divided-difference bound at one `(eps, radius)` pair.
pub fn example_bound_replay(eps: f64, radius: f64, cfg: &SamplerConfig) -> BoundReplay {
    assert!(eps > 0.0 && radius >= 0.0);
    let prims = PrimitiveTable::default_with_eps(eps);
    let ectx = EvalCtx::analytic(prims);
    let term = parse("let y be add(x) in diff(f y, f x)", &ectx.prims).unwrap();
    let real = SimpleType::Real;
    let ctx = TypingContext::new(vec![
        ("f".into(), SimpleType::arrow(real.clone(), real.clone())),
        ("x".into(), real.clone()),
    ])
    .unwrap();

    let id = SemValue::real_fun("id", |x| x);
    let sin = SemValue::real_fun("sin", f64::sin);

    let f_id_0 = eval(&ectx, &ctx, &term, &vec![id.clone(), SemValue::Real(0.0)]).as_real();
    let f_sin_a = eval(&ectx, &ctx, &term, &vec![sin.clone(), SemValue::Real(radius)]).as_real();
    let actual = (f_id_0 - f_sin_a).abs();

    // Inner supremum of the display bound; the disk endpoints are on the
    // grid, so the bound dominates the actual gap by construction.
    let (inner, resolution) = grid_sup(
        -radius,
        radius,
        cfg.grid_resolution,
        cfg.grid_cap,
        cfg.tol,
        |y| (1.0 - ((y + eps).sin() - y.sin()) / eps).abs(),
    );
    let bound = (radius / eps).max(inner);

    // Cross-check against the derivative route: feed the estimated
    // identity-to-sine distance and the ground radius into the derivative.
    let d_hat = {
        let (id, sin, cfg) = (id.clone(), sin.clone(), cfg.clone());
        QuantaleValue::err_fun("rho-hat(id, sin)", move |x, a| {
            rho_hat_arrow(&SimpleType::Real, &SimpleType::Real, &id, &sin, x, a, &cfg)
                .expect("first-order estimate")
        })
    };
    let bound_via_derivative = derive(
        &ectx,
        &ctx,
        &term,
        &vec![id, SemValue::Real(0.0)],
        &vec![d_hat, QuantaleValue::scalar(radius)],
    )
    .as_scalar();

    BoundReplay {
        eps,
        radius,
        bound,
        actual,
        bound_via_derivative,
        grid_resolution: resolution,
    }
}

/// The sweep from the worked example: radii `eps^2` for each `eps`.
pub fn bound_sweep(epss: &[f64], cfg: &SamplerConfig) -> Vec<BoundReplay> {
    epss.iter()
        .map(|&eps| example_bound_replay(eps, eps * eps, cfg))
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeOutcome {
    pub name: String,
    pub admitted: bool,
    /// `J` applied to the probe, when admitted: enters the self-distance.
    pub j_value: Option<f64>,
    pub witness: Option<serde_json::Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NoGreatestReport {
    pub corpus: Vec<String>,
    pub jo: f64,
    pub jz: f64,
    /// Samples behind the `(O, D, Z)` membership on the definable corpus.
    pub membership_oz_samples: usize,
    pub sigma_j_at_od: f64,
    pub probes: Vec<ProbeOutcome>,
    /// Probe functionals rejected because the injected non-definable scaling
    /// forces them to vanish; each carries its refutation witness.
    pub forced_to_zero: Vec<String>,
    pub violated_triple: [f64; 3],
    pub violation_confirmed: bool,
}

fn fun_real(name: &str, f: impl Fn(f64) -> f64 + 'static) -> SemValue {
    SemValue::real_fun(name, f)
}

/// The definable corpus at `Real -> Real` with no primitives: constants on
/// a small grid, plus the identity.
pub fn definable_corpus_rr() -> Vec<Definable> {
    let empty = PrimitiveTable::empty();
    let mut out = Vec::new();
    for c in [-2.0, -1.0, -0.5, 0.0, 0.5, 1.0, 2.0] {
        let src = format!("\\x:Real. {c:?}");
        out.push(Definable::new(
            format!("const{c}"),
            Some(parse(&src, &empty).unwrap()),
            fun_real(&format!("const{c}"), move |_| c),
        ));
    }
    out.push(Definable::new(
        "id",
        Some(parse("\\x:Real. x", &empty).unwrap()),
        fun_real("id", |x| x),
    ));
    out
}

/// Runs the whole counterexample replay. Refuses a nonempty table: the
/// classification of definable first-order functions as constants or the
/// identity only holds with no primitives.
pub fn replay_no_greatest(
    prims: &PrimitiveTable,
    cfg: &SamplerConfig,
) -> Result<NoGreatestReport, DemoError> {
    if !prims.is_empty() {
        return Err(DemoError::NonEmptyPrims(prims.len()));
    }
    let real = SimpleType::Real;
    let rr = SimpleType::arrow(real.clone(), real.clone());
    let rr_r = SimpleType::arrow(rr.clone(), real.clone());

    let corpus = definable_corpus_rr();
    let corpus_names: Vec<String> = corpus.iter().map(|d| d.name.clone()).collect();

    // O(f) = 0 and Z(f) = f(0): both definable functionals.
    let o_fun = SemValue::fun("O", |_| SemValue::Real(0.0));
    let z_fun = SemValue::fun("Z", |f| f.apply(&SemValue::Real(0.0)));
    // k(x) = 1 and J(F) = F(k).
    let k = fun_real("const1", |_| 1.0);
    let j = {
        let k = k.clone();
        SemValue::fun("J", move |f| f.apply(&k))
    };

    let jo = j.apply(&o_fun).as_real();
    let jz = j.apply(&z_fun).as_real();

    // D is the definable-observation distance between O and Z: at (f, d),
    // the worst |g(0)| over corpus members g admitted by (f, d, g). A
    // function outside the corpus admits nothing, so the meet over the
    // empty family gives the unit 0.
    let d_err_fun = {
        let corpus = corpus.clone();
        let cfg = cfg.clone();
        let rr = rr.clone();
        QuantaleValue::err_fun("delta-hat(O, Z)", move |f, d| {
            if identify_in_corpus(f, &corpus).is_none() {
                return QuantaleValue::scalar(0.0);
            }
            let mut worst = 0.0f64;
            let mut any = false;
            for g in &corpus {
                let corpus_cfg = SamplerConfig {
                    carrier_mode: CarrierMode::DefinableCorpus(corpus.clone()),
                    ..cfg.clone()
                };
                if member_at(&rr, f, d, &g.value, &corpus_cfg).holds() {
                    any = true;
                    worst = worst.max(g.value.apply(&SemValue::Real(0.0)).as_real().abs());
                }
            }
            QuantaleValue::scalar(if any { worst } else { 0.0 })
        })
    };

    // (O, D, Z) is a member at (Real -> Real) -> Real when quantification
    // stays on the definable corpus.
    let corpus_cfg = SamplerConfig {
        carrier_mode: CarrierMode::DefinableCorpus(corpus.clone()),
        ..cfg.clone()
    };
    let oz = member_at(&rr_r, &o_fun, &d_err_fun, &z_fun, &corpus_cfg);
    let membership_oz_samples = match &oz {
        Verdict::SampledOk { samples } => *samples,
        Verdict::Proved => 0,
        Verdict::Refuted(w) => {
            panic!("(O, D, Z) must hold on the definable corpus, got witness {w}")
        }
    };

    // Full-space membership (O, D, F): the corpus plus the non-definable
    // doubling function. D vanishes off the corpus, which forces admitted
    // functionals to vanish everywhere we probe.
    let mut full_family = corpus.clone();
    full_family.push(Definable::new(
        "double",
        None,
        fun_real("double", |x| 2.0 * x),
    ));
    let full_cfg = SamplerConfig {
        carrier_mode: CarrierMode::DefinableCorpus(full_family),
        ..cfg.clone()
    };

    let probe_functionals: Vec<(String, SemValue)> = vec![
        ("O".into(), o_fun.clone()),
        ("Z".into(), z_fun.clone()),
        ("eval-at-1".into(), SemValue::fun("eval-at-1", |f| f.apply(&SemValue::Real(1.0)))),
        ("const-1".into(), SemValue::fun("const-1", |_| SemValue::Real(1.0))),
        ("const-0.5".into(), SemValue::fun("const-0.5", |_| SemValue::Real(0.5))),
    ];

    let mut probes = Vec::new();
    let mut forced = Vec::new();
    let mut admitted_j_values = Vec::new();
    for (name, f_probe) in &probe_functionals {
        let v = member_at(&rr_r, &o_fun, &d_err_fun, f_probe, &full_cfg);
        let admitted = v.holds();
        if admitted {
            admitted_j_values.push(j.apply(f_probe).as_real());
        } else {
            forced.push(name.clone());
        }
        probes.push(ProbeOutcome {
            name: name.clone(),
            admitted,
            j_value: admitted.then(|| j.apply(f_probe).as_real()),
            witness: v.witness().map(|w| w.0.clone()),
        });
    }

    // Self-distance of J at (O, D): the worst |J O - J F| over admitted
    // probes. Only the zero functional survives, so this is 0.
    let sigma_j_at_od = admitted_j_values
        .iter()
        .map(|jf| (jo - jf).abs())
        .fold(0.0f64, f64::max);

    // The membership that cannot hold: (J O, sigma_J(O, D), J Z) at Real.
    let violation = member_at(
        &real,
        &SemValue::Real(jo),
        &QuantaleValue::scalar(sigma_j_at_od),
        &SemValue::Real(jz),
        cfg,
    );

    Ok(NoGreatestReport {
        corpus: corpus_names,
        jo,
        jz,
        membership_oz_samples,
        sigma_j_at_od,
        probes,
        forced_to_zero: forced,
        violated_triple: [jo, sigma_j_at_od, jz],
        violation_confirmed: !violation.holds(),
    })
}

/// Matches a function value against the corpus by probing a fixed spread of
/// points.
fn identify_in_corpus<'a>(f: &SemValue, corpus: &'a [Definable]) -> Option<&'a Definable> {
    const PROBES: [f64; 6] = [-1.7, -0.3, 0.0, 0.6, 1.1, 2.4];
    corpus.iter().find(|cand| {
        PROBES.iter().all(|&p| {
            let x = SemValue::Real(p);
            (f.apply(&x).as_real() - cand.value.apply(&x).as_real()).abs() < 1e-9
        })
    })
}

/// Membership of a corpus pair under the derivative-backed distance, used
/// by tests that need a sound nontrivial triple at `Real -> Real`.
pub fn corpus_pair_triple(
    u: &Definable,
    v: &Definable,
) -> Option<(SemValue, QuantaleValue, SemValue)> {
    let ectx = EvalCtx::analytic(PrimitiveTable::empty());
    let (tu, tv) = (u.term.as_ref()?, v.term.as_ref()?);
    let d = two_term_bound_err_fun(&ectx, tu, tv).ok()?;
    Some((u.value.clone(), d, v.value.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_replay_holds_and_is_small() {
        let cfg = SamplerConfig::default();
        let r = example_bound_replay(0.1, 0.01, &cfg);
        assert!(r.actual <= r.bound + 1e-12, "{} > {}", r.actual, r.bound);
        assert!(r.bound < 0.2, "bound {} too loose", r.bound);
        assert!(r.actual <= r.bound_via_derivative + 1e-9);
        // With radius = eps^2 = 0.01 the display bound is radius/eps = 0.1.
        assert!((r.bound - 0.1).abs() < 1e-9);
    }

    #[test]
    fn bound_sweep_decreases_to_zero() {
        let cfg = SamplerConfig::default();
        let rs = bound_sweep(&[0.1, 0.01, 0.001], &cfg);
        for r in &rs {
            assert!(r.actual <= r.bound + 1e-12);
        }
        assert!(rs[0].bound > rs[1].bound);
        assert!(rs[1].bound > rs[2].bound);
        assert!(rs[2].bound < 0.01);
    }

    #[test]
    fn no_greatest_replay_reports_paper_numbers() {
        let cfg = SamplerConfig::default();
        let report = replay_no_greatest(&PrimitiveTable::empty(), &cfg).unwrap();
        assert_eq!(report.jo, 0.0);
        assert_eq!(report.jz, 1.0);
        assert_eq!(report.sigma_j_at_od, 0.0);
        assert_eq!(report.violated_triple, [0.0, 0.0, 1.0]);
        assert!(report.violation_confirmed);
        assert!(report.membership_oz_samples > 0);
        // Z is forced out by the injected non-definable function.
        assert!(report.forced_to_zero.contains(&"Z".to_string()));
        let z_probe = report.probes.iter().find(|p| p.name == "Z").unwrap();
        assert!(!z_probe.admitted);
        assert!(z_probe.witness.is_some());
        let o_probe = report.probes.iter().find(|p| p.name == "O").unwrap();
        assert!(o_probe.admitted);
    }

    #[test]
    fn no_greatest_refuses_nonempty_table() {
        let cfg = SamplerConfig::default();
        let err = replay_no_greatest(&PrimitiveTable::default_with_eps(0.1), &cfg);
        assert!(matches!(err, Err(DemoError::NonEmptyPrims(_))));
    }
}
