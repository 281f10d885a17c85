//! Distances in the interpreted spaces: membership of triples `(x, a, y)`
//! in the type-indexed relation, grid estimation of the induced distance at
//! arrow types, self-distances, and derivative-backed two-term bounds.
//!
//! Ground and product shapes are exact. Arrow shapes quantify over a carrier
//! and can only be sampled; every sampled verdict says how many points it
//! saw, and every refutation carries the concrete triple that failed.

pub mod demo;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::lambda::{typecheck, SimpleType, Term, TypeError, TypingContext};
use crate::quantale::{self, QuantaleValue};
use crate::semantics::{derive, eval, quantale_of_type, EvalCtx};
use crate::value::SemValue;
use crate::verdict::{Verdict, Witness};

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("domain type {0} is higher-order: the disk cannot be enumerated exactly")]
    HigherOrderDomain(SimpleType),
    #[error("codomain type {0} is higher-order: no exact ground distance")]
    HigherOrderCodomain(SimpleType),
    #[error(transparent)]
    Type(#[from] TypeError),
    #[error("term `{term}` must be a closed function into Real, found type {found}")]
    NotAFunctionIntoReal { term: String, found: SimpleType },
}

/// A named, possibly term-backed element of a definable family.
#[derive(Clone)]
pub struct Definable {
    pub name: String,
    pub term: Option<Term>,
    pub value: SemValue,
}

impl Definable {
    pub fn new(name: impl Into<String>, term: Option<Term>, value: SemValue) -> Self {
        Definable {
            name: name.into(),
            term,
            value,
        }
    }
}

/// Which carrier the quantified positions range over: raw semantic values,
/// or a finite family of definable elements.
#[derive(Clone, Default)]
pub enum CarrierMode {
    #[default]
    FullSpace,
    DefinableCorpus(Vec<Definable>),
}

#[derive(Clone)]
pub struct SamplerConfig {
    pub seed: u64,
    pub points_per_domain: usize,
    pub box_lo: f64,
    pub box_hi: f64,
    pub radius_chain: Vec<f64>,
    pub carrier_mode: CarrierMode,
    pub grid_resolution: usize,
    pub grid_cap: usize,
    /// Tolerance for grid-estimated quantities.
    pub tol: f64,
    /// Absolute tolerance for exact-arithmetic bound comparisons; soaks up
    /// float ties when a sampled point attains a bound exactly.
    pub exact_tol: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            seed: 0,
            points_per_domain: 8,
            box_lo: -2.0,
            box_hi: 2.0,
            radius_chain: vec![0.0, 0.1, 0.5, 1.0, 2.0],
            carrier_mode: CarrierMode::FullSpace,
            grid_resolution: 2048,
            grid_cap: 1 << 16,
            tol: 1e-3,
            exact_tol: 1e-9,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        SamplerConfig {
            seed,
            ..Default::default()
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }
}

pub struct MembershipQuery {
    pub ty: SimpleType,
    pub left: SemValue,
    pub radius: QuantaleValue,
    pub right: SemValue,
    pub sampler: SamplerConfig,
}

/// Is `(left, radius, right)` in the relation at `ty`?
///
/// Exact at `Real` and products of exact shapes; sampled at arrows, where
/// the quantified triples are drawn soundly (each sampled triple genuinely
/// belongs to the domain relation).
pub fn member(q: &MembershipQuery) -> Verdict {
    member_at(&q.ty, &q.left, &q.radius, &q.right, &q.sampler)
}

pub fn member_at(
    ty: &SimpleType,
    left: &SemValue,
    radius: &QuantaleValue,
    right: &SemValue,
    cfg: &SamplerConfig,
) -> Verdict {
    match ty {
        SimpleType::Real => {
            let (x, y) = (left.as_real(), right.as_real());
            let a = radius.as_scalar();
            // (x, a, y) holds iff a ⊑ |x - y| in the reversed order,
            // i.e. the radius dominates the actual gap numerically.
            if a + cfg.exact_tol >= (x - y).abs() {
                Verdict::Proved
            } else {
                Verdict::Refuted(Witness::object(vec![
                    ("type", serde_json::json!("Real")),
                    ("x", serde_json::json!(x)),
                    ("a", serde_json::json!(a)),
                    ("y", serde_json::json!(y)),
                    ("gap", serde_json::json!((x - y).abs())),
                ]))
            }
        }
        SimpleType::Prod(lt, rt) => {
            let (ra, rb) = radius.as_pair();
            member_at(lt, left.fst(), ra, right.fst(), cfg)
                .and(member_at(rt, left.snd(), rb, right.snd(), cfg))
        }
        SimpleType::Arrow(dom, cod) => {
            let d = radius.as_err_fun();
            let triples = sample_domain_triples(dom, cfg);
            let mut samples = 0usize;
            for (xv, av, yv, how) in &triples {
                let out_radius = d.apply(xv, av);
                let fx = left.apply(xv);
                let gy = right.apply(yv);
                let fy = left.apply(yv);
                for (tag, out) in [("left-right", &gy), ("left-left", &fy)] {
                    let v = member_at(cod, &fx, &out_radius, out, cfg);
                    match v {
                        Verdict::Refuted(w) => {
                            return Verdict::Refuted(Witness::object(vec![
                                ("clause", serde_json::json!(tag)),
                                ("x", serde_json::json!(xv.to_string())),
                                ("a", serde_json::json!(av.to_string())),
                                ("y", serde_json::json!(yv.to_string())),
                                ("triple_source", serde_json::json!(how)),
                                ("inner", w.0),
                            ]))
                        }
                        Verdict::Proved => samples += 1,
                        Verdict::SampledOk { samples: s } => samples += s,
                    }
                }
            }
            Verdict::SampledOk { samples }
        }
    }
}

/// Draws triples `(x, a, y)` that provably belong to the relation at `dom`.
/// The `&'static str` tags where each triple came from, for witnesses.
fn sample_domain_triples(
    dom: &SimpleType,
    cfg: &SamplerConfig,
) -> Vec<(SemValue, QuantaleValue, SemValue, &'static str)> {
    let mut rng = cfg.rng();
    let mut out = Vec::new();
    match dom {
        SimpleType::Real => {
            for _ in 0..cfg.points_per_domain {
                let x = rng.gen_range(cfg.box_lo..=cfg.box_hi);
                for &a in &cfg.radius_chain {
                    // Endpoints realize the radius exactly; interior points
                    // keep slack. All satisfy a >= |x - y|.
                    let ys = [x - a, x + a, x + a * (2.0 * rng.gen::<f64>() - 1.0)];
                    for y in ys {
                        out.push((
                            SemValue::Real(x),
                            QuantaleValue::scalar(a),
                            SemValue::Real(y),
                            "ground-box",
                        ));
                    }
                }
            }
        }
        SimpleType::Prod(lt, rt) => {
            let ls = sample_domain_triples(lt, cfg);
            let rs = sample_domain_triples(rt, cfg);
            for (i, (lx, la, ly, _)) in ls.iter().enumerate() {
                let (rx, ra, ry, _) = &rs[i % rs.len()];
                out.push((
                    SemValue::pair(lx.clone(), rx.clone()),
                    QuantaleValue::pair(la.clone(), ra.clone()),
                    SemValue::pair(ly.clone(), ry.clone()),
                    "product",
                ));
            }
        }
        SimpleType::Arrow(_, _) => {
            // Sound choices only: the bottom radius relates any two values,
            // and derivative-backed bounds relate definable pairs.
            let q = quantale_of_type(dom);
            let bot = quantale::bottom(&q);
            let family: Vec<Definable> = match &cfg.carrier_mode {
                CarrierMode::DefinableCorpus(fam) => fam.clone(),
                CarrierMode::FullSpace => builtin_function_family(dom, cfg),
            };
            let ectx = EvalCtx::analytic(crate::lambda::PrimitiveTable::default_with_eps(0.1));
            for (i, u) in family.iter().enumerate() {
                for v in family.iter().skip(i) {
                    out.push((u.value.clone(), bot.clone(), v.value.clone(), "bottom-radius"));
                    out.push((v.value.clone(), bot.clone(), u.value.clone(), "bottom-radius"));
                    if let (Some(tu), Some(tv)) = (&u.term, &v.term) {
                        if let Ok(d) = two_term_bound_err_fun(&ectx, tu, tv) {
                            out.push((u.value.clone(), d, v.value.clone(), "two-term-bound"));
                        }
                    }
                }
            }
        }
    }
    out
}

/// A small library of named functions for full-space sampling at `R -> R`;
/// higher shapes fall back to drawn samples.
fn builtin_function_family(dom: &SimpleType, cfg: &SamplerConfig) -> Vec<Definable> {
    match dom {
        SimpleType::Arrow(d, c) if **d == SimpleType::Real && **c == SimpleType::Real => {
            let prims = crate::lambda::PrimitiveTable::default_with_eps(0.1);
            let t = |src: &str| crate::lambda::parse(src, &prims).ok();
            vec![
                Definable::new("id", t("\\x:Real. x"), SemValue::real_fun("id", |x| x)),
                Definable::new(
                    "const0",
                    t("\\x:Real. 0.0"),
                    SemValue::real_fun("const0", |_| 0.0),
                ),
                Definable::new(
                    "const1",
                    t("\\x:Real. 1.0"),
                    SemValue::real_fun("const1", |_| 1.0),
                ),
                Definable::new(
                    "sin",
                    t("\\x:Real. sin(x)"),
                    SemValue::real_fun("sin", f64::sin),
                ),
                Definable::new(
                    "neg",
                    t("\\x:Real. neg(x)"),
                    SemValue::real_fun("neg", |x| -x),
                ),
            ]
        }
        _ => {
            let mut rng = cfg.rng();
            let carrier = crate::semantics::carrier_of_type(dom);
            (0..3)
                .map(|i| {
                    let v = carrier.sample(&mut rng, cfg.box_lo, cfg.box_hi);
                    Definable::new(format!("sample{i}"), None, v)
                })
                .collect()
        }
    }
}

/// Supremum of `f` over a 1-D interval by grid evaluation with doubling:
/// starts at `res` points, doubles until two successive estimates agree
/// within `tol / 2` or the cap is reached. Returns the estimate and the
/// final resolution. Endpoints are always on the grid.
pub fn grid_sup(
    lo: f64,
    hi: f64,
    res: usize,
    cap: usize,
    tol: f64,
    f: impl Fn(f64) -> f64,
) -> (f64, usize) {
    let eval_at = |n: usize| -> f64 {
        let mut worst = f64::NEG_INFINITY;
        for k in 0..n {
            let t = k as f64 / (n - 1) as f64;
            worst = worst.max(f(lo + (hi - lo) * t));
        }
        worst
    };
    if hi <= lo {
        return (f(lo), 1);
    }
    let mut n = res.max(2);
    let mut prev = eval_at(n);
    loop {
        let next_n = n * 2;
        if next_n > cap {
            return (prev, n);
        }
        let next = eval_at(next_n);
        if (next - prev).abs() < tol / 2.0 {
            return (next, next_n);
        }
        prev = next;
        n = next_n;
    }
}

/// Distance estimate between `f` and `g` at an arrow type with first-order
/// domain and codomain: the worst of the two clause distances over the disk
/// around `x` of radius `a`, grid-approximated from below.
pub fn rho_hat_arrow(
    dom: &SimpleType,
    cod: &SimpleType,
    f: &SemValue,
    g: &SemValue,
    x: &SemValue,
    a: &QuantaleValue,
    cfg: &SamplerConfig,
) -> Result<QuantaleValue, MetricsError> {
    if !cod.is_first_order() {
        return Err(MetricsError::HigherOrderCodomain(cod.clone()));
    }
    match dom {
        SimpleType::Real => {
            let xr = x.as_real();
            let ar = a.as_scalar();
            let sweep = if ar.is_finite() { ar } else { 1.0e3 };
            let fx = f.apply(x);
            match cod {
                SimpleType::Real => {
                    let fxr = fx.as_real();
                    let (sup, _res) = grid_sup(
                        xr - sweep,
                        xr + sweep,
                        cfg.grid_resolution,
                        cfg.grid_cap,
                        cfg.tol,
                        |y| {
                            let yv = SemValue::Real(y);
                            let gy = g.apply(&yv).as_real();
                            let fy = f.apply(&yv).as_real();
                            (fxr - gy).abs().max((fxr - fy).abs())
                        },
                    );
                    Ok(QuantaleValue::scalar(sup.max(0.0)))
                }
                _ => {
                    // Componentwise: the meet over the disk is the numeric
                    // sup in each ground slot.
                    let points = linspace(xr - sweep, xr + sweep, cfg.grid_resolution);
                    let q = quantale_of_type(cod);
                    let mut fam = Vec::with_capacity(points.len());
                    for y in points {
                        let yv = SemValue::Real(y);
                        let gy = g.apply(&yv);
                        let fy = f.apply(&yv);
                        let d1 = ground_distance(cod, &fx, &gy)?;
                        let d2 = ground_distance(cod, &fx, &fy)?;
                        fam.push(quantale::meet(&q, &[d1, d2]).expect("shapes match"));
                    }
                    Ok(quantale::meet(&q, &fam).expect("shapes match"))
                }
            }
        }
        SimpleType::Prod(_, _) if dom.is_first_order() => {
            let points = disk_points(dom, x, a, disk_resolution(dom, cfg))?;
            let fx = f.apply(x);
            let q = quantale_of_type(cod);
            let mut fam = Vec::with_capacity(points.len());
            for yv in points {
                let gy = g.apply(&yv);
                let fy = f.apply(&yv);
                fam.push(
                    quantale::meet(
                        &q,
                        &[
                            ground_distance(cod, &fx, &gy)?,
                            ground_distance(cod, &fx, &fy)?,
                        ],
                    )
                    .expect("shapes match"),
                );
            }
            Ok(quantale::meet(&q, &fam).expect("shapes match"))
        }
        other => Err(MetricsError::HigherOrderDomain(other.clone())),
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    if hi <= lo {
        return vec![lo];
    }
    (0..n)
        .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
        .collect()
}

fn disk_resolution(dom: &SimpleType, cfg: &SamplerConfig) -> usize {
    fn ground_slots(t: &SimpleType) -> usize {
        match t {
            SimpleType::Real => 1,
            SimpleType::Prod(l, r) => ground_slots(l) + ground_slots(r),
            SimpleType::Arrow(_, _) => 1,
        }
    }
    let dims = ground_slots(dom).max(1);
    ((cfg.grid_resolution as f64).powf(1.0 / dims as f64) as usize).clamp(2, cfg.grid_resolution)
}

/// Every point of the box `|x_i - y_i| <= a_i` on a grid; first-order only.
fn disk_points(
    ty: &SimpleType,
    x: &SemValue,
    a: &QuantaleValue,
    res: usize,
) -> Result<Vec<SemValue>, MetricsError> {
    match ty {
        SimpleType::Real => {
            let xr = x.as_real();
            let ar = a.as_scalar();
            let sweep = if ar.is_finite() { ar } else { 1.0e3 };
            let n = if ar == 0.0 { 1 } else { res };
            Ok(linspace(xr - sweep, xr + sweep, n)
                .into_iter()
                .take(n)
                .map(SemValue::Real)
                .collect())
        }
        SimpleType::Prod(lt, rt) => {
            let (la, ra) = a.as_pair();
            let ls = disk_points(lt, x.fst(), la, res)?;
            let rs = disk_points(rt, x.snd(), ra, res)?;
            let mut out = Vec::with_capacity(ls.len() * rs.len());
            for l in &ls {
                for r in &rs {
                    out.push(SemValue::pair(l.clone(), r.clone()));
                }
            }
            Ok(out)
        }
        other => Err(MetricsError::HigherOrderDomain(other.clone())),
    }
}

/// Exact distance at a first-order type.
fn ground_distance(
    ty: &SimpleType,
    u: &SemValue,
    v: &SemValue,
) -> Result<QuantaleValue, MetricsError> {
    match ty {
        SimpleType::Real => Ok(QuantaleValue::scalar((u.as_real() - v.as_real()).abs())),
        SimpleType::Prod(l, r) => Ok(QuantaleValue::pair(
            ground_distance(l, u.fst(), v.fst())?,
            ground_distance(r, u.snd(), v.snd())?,
        )),
        other => Err(MetricsError::HigherOrderCodomain(other.clone())),
    }
}

/// Self-distance of a value: 0 at `Real`, componentwise on pairs, and the
/// oscillation error function at arrows (grid-estimated, so a numeric
/// under-approximation of the true self-distance).
pub fn self_distance(ty: &SimpleType, x: &SemValue, cfg: &SamplerConfig) -> QuantaleValue {
    match ty {
        SimpleType::Real => QuantaleValue::scalar(0.0),
        SimpleType::Prod(l, r) => QuantaleValue::pair(
            self_distance(l, x.fst(), cfg),
            self_distance(r, x.snd(), cfg),
        ),
        SimpleType::Arrow(dom, cod) => {
            let f = x.clone();
            let dom = (**dom).clone();
            let cod = (**cod).clone();
            let cfg = cfg.clone();
            QuantaleValue::err_fun(format!("sigma[{x}]"), move |x2, a2| {
                match rho_hat_arrow(&dom, &cod, &f, &f, x2, a2, &cfg) {
                    Ok(v) => v,
                    Err(_) => sampled_self_distance_value(&dom, &cod, &f, x2, a2, &cfg),
                }
            })
        }
    }
}

/// Higher-order fallback for self-distances: quantify over a probe family,
/// keep the probes admitted by membership, and take the worst codomain
/// distance among them.
fn sampled_self_distance_value(
    dom: &SimpleType,
    cod: &SimpleType,
    f: &SemValue,
    x: &SemValue,
    a: &QuantaleValue,
    cfg: &SamplerConfig,
) -> QuantaleValue {
    let q = quantale_of_type(cod);
    let probes = builtin_function_family(dom, cfg);
    let mut fam = Vec::new();
    for p in &probes {
        if member_at(dom, x, a, &p.value, cfg).holds() {
            let fx = f.apply(x);
            let fy = f.apply(&p.value);
            if let Ok(d) = ground_distance(cod, &fx, &fy) {
                fam.push(d);
            }
        }
    }
    quantale::meet(&q, &fam).expect("shapes match")
}

/// The derivative-backed bound between two closed function terms: at a
/// point `x` and radius `a`,
/// `max(|t(x) - s(x)| + ds(x, a), dt(x, a))`
/// where `dt`, `ds` are the terms' error derivatives. Soundness of the
/// derivatives makes `(t, bound, s)` a genuine member at the arrow type.
pub fn two_term_bound(
    ectx: &EvalCtx,
    t: &Term,
    s: &Term,
    x: &SemValue,
    a: &QuantaleValue,
) -> Result<f64, MetricsError> {
    let d = two_term_bound_err_fun(ectx, t, s)?;
    Ok(d.as_err_fun().apply(x, a).as_scalar())
}

/// The same bound packaged as an error function over the whole domain.
pub fn two_term_bound_err_fun(
    ectx: &EvalCtx,
    t: &Term,
    s: &Term,
) -> Result<QuantaleValue, MetricsError> {
    let empty = TypingContext::empty();
    for (term, label) in [(t, "left"), (s, "right")] {
        let ty = typecheck(&empty, term, &ectx.prims)?;
        match ty {
            SimpleType::Arrow(_, cod) if *cod == SimpleType::Real => {}
            found => {
                return Err(MetricsError::NotAFunctionIntoReal {
                    term: format!("{label}: {term}"),
                    found,
                })
            }
        }
    }
    let tv = eval(ectx, &empty, t, &vec![]);
    let sv = eval(ectx, &empty, s, &vec![]);
    let td = derive(ectx, &empty, t, &vec![], &vec![]);
    let sd = derive(ectx, &empty, s, &vec![], &vec![]);
    let label = format!("bound2({t}, {s})");
    Ok(QuantaleValue::err_fun(label, move |x, a| {
        let gap = (tv.apply(x).as_real() - sv.apply(x).as_real()).abs();
        let ds = sd.as_err_fun().apply(x, a).as_scalar();
        let dt = td.as_err_fun().apply(x, a).as_scalar();
        QuantaleValue::scalar((gap + ds).max(dt))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{parse, PrimitiveTable};
    use std::f64::consts::PI;

    fn cfg() -> SamplerConfig {
        SamplerConfig::default()
    }

    #[test]
    fn ground_membership_is_exact() {
        let v = member_at(
            &SimpleType::Real,
            &SemValue::Real(0.0),
            &QuantaleValue::scalar(2.0),
            &SemValue::Real(1.0),
            &cfg(),
        );
        assert_eq!(v, Verdict::Proved);
        let v = member_at(
            &SimpleType::Real,
            &SemValue::Real(0.0),
            &QuantaleValue::scalar(0.5),
            &SemValue::Real(1.0),
            &cfg(),
        );
        assert!(!v.holds());
    }

    #[test]
    fn ground_membership_downward_closed() {
        // If (x, a, y) holds and b ⊑ a (b numerically larger), (x, b, y) holds.
        for (x, a, y) in [(0.0, 2.0, 1.0), (1.5, 0.25, 1.4)] {
            let base = member_at(
                &SimpleType::Real,
                &SemValue::Real(x),
                &QuantaleValue::scalar(a),
                &SemValue::Real(y),
                &cfg(),
            );
            assert!(base.holds());
            for extra in [0.5, 10.0, f64::INFINITY] {
                let v = member_at(
                    &SimpleType::Real,
                    &SemValue::Real(x),
                    &QuantaleValue::scalar(a + extra),
                    &SemValue::Real(y),
                    &cfg(),
                );
                assert!(v.holds());
            }
        }
    }

    #[test]
    fn constant_zero_radius_refutes_sin() {
        // (sin, constant-0, sin) fails: only constants self-relate at 0.
        let ty = SimpleType::arrow(SimpleType::Real, SimpleType::Real);
        let sin = SemValue::real_fun("sin", f64::sin);
        let zero = QuantaleValue::const_err_fun("zero", QuantaleValue::scalar(0.0));
        let v = member_at(&ty, &sin, &zero, &sin, &cfg());
        assert!(!v.holds(), "sin is not constant");
        let c1 = SemValue::real_fun("const1", |_| 1.0);
        let v = member_at(&ty, &c1, &zero, &c1, &cfg());
        assert!(matches!(v, Verdict::SampledOk { .. }));
    }

    #[test]
    fn asymmetric_distance_values() {
        // The sine/identity estimates at (pi, 2 pi) differ: 3 pi vs 2 pi.
        let sin = SemValue::real_fun("sin", f64::sin);
        let id = SemValue::real_fun("id", |x| x);
        let x = SemValue::Real(PI);
        let a = QuantaleValue::scalar(2.0 * PI);
        let c = cfg();
        let d1 = rho_hat_arrow(&SimpleType::Real, &SimpleType::Real, &sin, &id, &x, &a, &c)
            .unwrap()
            .as_scalar();
        let d2 = rho_hat_arrow(&SimpleType::Real, &SimpleType::Real, &id, &sin, &x, &a, &c)
            .unwrap()
            .as_scalar();
        assert!((d1 - 3.0 * PI).abs() < 1e-3, "sin->id: {d1}");
        assert!((d2 - 2.0 * PI).abs() < 1e-3, "id->sin: {d2}");
        assert!(d1 > d2 + 1.0, "asymmetry is genuine");
    }

    #[test]
    fn zero_radius_disk_is_a_point() {
        let f = SemValue::real_fun("sin", f64::sin);
        let v = rho_hat_arrow(
            &SimpleType::Real,
            &SimpleType::Real,
            &f,
            &f,
            &SemValue::Real(0.3),
            &QuantaleValue::scalar(0.0),
            &cfg(),
        )
        .unwrap();
        assert_eq!(v.as_scalar(), 0.0);
    }

    #[test]
    fn self_distance_shapes() {
        let c = cfg();
        assert_eq!(
            self_distance(&SimpleType::Real, &SemValue::Real(3.7), &c).as_scalar(),
            0.0
        );
        let ty = SimpleType::arrow(SimpleType::Real, SimpleType::Real);
        let constant = SemValue::real_fun("const", |_| 5.0);
        let sigma = self_distance(&ty, &constant, &c);
        let out = sigma
            .as_err_fun()
            .apply(&SemValue::Real(1.0), &QuantaleValue::scalar(2.0));
        assert_eq!(out.as_scalar(), 0.0, "constants have the unit self-distance");
        // For the identity, sigma(x, a) is the disk radius a itself.
        let id = SemValue::real_fun("id", |x| x);
        let sigma = self_distance(&ty, &id, &c);
        let out = sigma
            .as_err_fun()
            .apply(&SemValue::Real(0.0), &QuantaleValue::scalar(1.5));
        assert!((out.as_scalar() - 1.5).abs() < 1e-3);
    }

    #[test]
    fn self_distance_composes_through_application() {
        // sigma_f(x, sigma_x) = sigma_{fx} on ground points: both sides 0.
        let c = cfg();
        let ty = SimpleType::arrow(SimpleType::Real, SimpleType::Real);
        let sin = SemValue::real_fun("sin", f64::sin);
        let sigma_f = self_distance(&ty, &sin, &c);
        let x = SemValue::Real(0.8);
        let sigma_x = self_distance(&SimpleType::Real, &x, &c);
        let lhs = sigma_f.as_err_fun().apply(&x, &sigma_x).as_scalar();
        assert!(lhs.abs() < 1e-9, "sigma_f(x, 0) must be 0, got {lhs}");
    }

    #[test]
    fn distinct_values_refute_self_radius_membership() {
        // (x, sigma_y, y) with x != y must be refuted; grid estimates only
        // shrink membership, so the refutation direction stays sound.
        let c = cfg();
        let ty = SimpleType::arrow(SimpleType::Real, SimpleType::Real);
        let id = SemValue::real_fun("id", |x| x);
        let sin = SemValue::real_fun("sin", f64::sin);
        let sigma_sin = self_distance(&ty, &sin, &c);
        let v = member_at(&ty, &id, &sigma_sin, &sin, &c);
        assert!(!v.holds(), "distinct functions at the target self-distance");
    }

    #[test]
    fn quasi_reflexivity_clause_is_syntactic() {
        // member(f, d, g) checks (fx, ., fy) too, so passing implies the
        // reflexive variant passes with the same samples.
        let c = cfg();
        let ty = SimpleType::arrow(SimpleType::Real, SimpleType::Real);
        let id = SemValue::real_fun("id", |x| x);
        let sin = SemValue::real_fun("sin", f64::sin);
        let ectx = EvalCtx::analytic(PrimitiveTable::default_with_eps(0.1));
        let t_id = parse("\\x:Real. x", &ectx.prims).unwrap();
        let t_sin = parse("\\x:Real. sin(x)", &ectx.prims).unwrap();
        let d = two_term_bound_err_fun(&ectx, &t_id, &t_sin).unwrap();
        let v1 = member_at(&ty, &id, &d, &sin, &c);
        assert!(v1.holds(), "derivative-backed bound relates id and sin: {v1:?}");
        let v2 = member_at(&ty, &id, &d, &id, &c);
        assert!(v2.holds());
    }

    #[test]
    fn two_term_bound_example() {
        // t = \x. 0, s = \x. x at (x, a) = (0, 1): max(0 + 1, 0) = 1.
        let ectx = EvalCtx::analytic(PrimitiveTable::default_with_eps(0.1));
        let t = parse("\\x:Real. 0.0", &ectx.prims).unwrap();
        let s = parse("\\x:Real. x", &ectx.prims).unwrap();
        let b = two_term_bound(
            &ectx,
            &t,
            &s,
            &SemValue::Real(0.0),
            &QuantaleValue::scalar(1.0),
        )
        .unwrap();
        assert_eq!(b, 1.0);
        // t = s collapses to the derivative bound.
        let b = two_term_bound(
            &ectx,
            &s,
            &s,
            &SemValue::Real(0.0),
            &QuantaleValue::scalar(0.75),
        )
        .unwrap();
        assert_eq!(b, 0.75);
    }

    #[test]
    fn two_term_bound_is_sound_on_samples() {
        // |t(x) - s(y)| <= bound(x, a) for sampled |x - y| <= a.
        let ectx = EvalCtx::analytic(PrimitiveTable::default_with_eps(0.1));
        let t = parse("\\x:Real. sin(x)", &ectx.prims).unwrap();
        let s = parse("\\x:Real. mul(x, 0.5)", &ectx.prims).unwrap();
        let tv = eval(&ectx, &TypingContext::empty(), &t, &vec![]);
        let sv = eval(&ectx, &TypingContext::empty(), &s, &vec![]);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let x = rng.gen_range(-2.0..2.0);
            let a = rng.gen_range(0.0..1.0);
            let y = x + a * (2.0 * rng.gen::<f64>() - 1.0);
            let bound = two_term_bound(
                &ectx,
                &t,
                &s,
                &SemValue::Real(x),
                &QuantaleValue::scalar(a),
            )
            .unwrap();
            let gap = (tv.apply(&SemValue::Real(x)).as_real()
                - sv.apply(&SemValue::Real(y)).as_real())
            .abs();
            assert!(gap <= bound + 1e-9, "at ({x}, {a}, {y}): {gap} > {bound}");
        }
    }

    #[test]
    fn non_function_terms_are_rejected() {
        let ectx = EvalCtx::analytic(PrimitiveTable::default_with_eps(0.1));
        let t = parse("1.0", &ectx.prims).unwrap();
        let s = parse("\\x:Real. x", &ectx.prims).unwrap();
        assert!(matches!(
            two_term_bound_err_fun(&ectx, &t, &s),
            Err(MetricsError::NotAFunctionIntoReal { .. })
        ));
    }

    #[test]
    fn grid_oracle_stays_below_analytic() {
        // The grid estimate of the sine oscillation never exceeds the
        // analytic modulus.
        let prims = PrimitiveTable::default_with_eps(0.1);
        let sin_prim = prims.get("sin").unwrap();
        let m = sin_prim.modulus.as_ref().unwrap();
        let c = cfg();
        let sin = SemValue::real_fun("sin", f64::sin);
        for (x, a) in [(0.0, 1.0), (1.2, 0.4), (-0.7, 3.0)] {
            let grid = rho_hat_arrow(
                &SimpleType::Real,
                &SimpleType::Real,
                &sin,
                &sin,
                &SemValue::Real(x),
                &QuantaleValue::scalar(a),
                &c,
            )
            .unwrap()
            .as_scalar();
            assert!(grid <= m(&[x], &[a]) + 1e-9);
        }
    }
}
