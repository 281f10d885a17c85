//! Commutative integral quantales.
//!
//! Five shapes cover everything the interpreters and the workbench need:
//!
//! * `Lawvere` — the extended nonnegative reals `[0, +inf]` under the
//!   *reversed* numeric order with addition. The unit `0` is the top element
//!   and `+inf` is bottom; meets are numeric suprema and joins are infima.
//! * `Product` — componentwise structure on pairs.
//! * `FunSpace` — monotone functions from a carrier times an inner quantale
//!   into an outer quantale, ordered and multiplied pointwise. Comparisons
//!   here are undecidable in general, so they are sampled and say so.
//! * `Lifted` — a fresh bottom `empty` glued strictly below an isomorphic
//!   copy of the base quantale, with an absorbing tensor.
//! * `FiniteTable` — an arbitrary finite quantale given by tables.
//!
//! Every scalar comparison in the crate goes through [`leq`]; nothing else
//! compares radii directly, which keeps the reversed order in one place.

pub mod finite;

pub use finite::{FiniteQuantale, FiniteQuantaleError, FiniteQuantaleSpec};

use std::fmt;
use std::rc::Rc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::value::{CarrierDescriptor, SemValue};
use crate::verdict::{Verdict, Witness};

#[derive(Debug, Error)]
pub enum QuantaleError {
    #[error("value `{value}` does not fit quantale shape `{descriptor}`")]
    ShapeMismatch { descriptor: String, value: String },
    #[error("finite element index {index} out of range for a table of {size} elements")]
    BadFiniteIndex { index: usize, size: usize },
    #[error("meet/join over mismatched shapes: `{left}` vs `{right}`")]
    MixedFamily { left: String, right: String },
}

/// Shape of a quantale.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantaleDescriptor {
    Lawvere,
    Product(Box<QuantaleDescriptor>, Box<QuantaleDescriptor>),
    FunSpace {
        domain: CarrierDescriptor,
        inner: Box<QuantaleDescriptor>,
        outer: Box<QuantaleDescriptor>,
    },
    Lifted(Box<QuantaleDescriptor>),
    FiniteTable(FiniteQuantale),
}

impl QuantaleDescriptor {
    pub fn product(l: QuantaleDescriptor, r: QuantaleDescriptor) -> Self {
        QuantaleDescriptor::Product(Box::new(l), Box::new(r))
    }

    pub fn fun_space(
        domain: CarrierDescriptor,
        inner: QuantaleDescriptor,
        outer: QuantaleDescriptor,
    ) -> Self {
        QuantaleDescriptor::FunSpace {
            domain,
            inner: Box::new(inner),
            outer: Box::new(outer),
        }
    }

    pub fn lifted(base: QuantaleDescriptor) -> Self {
        QuantaleDescriptor::Lifted(Box::new(base))
    }

    /// True when comparisons in this shape are decidable without sampling.
    pub fn is_exact(&self) -> bool {
        match self {
            QuantaleDescriptor::Lawvere | QuantaleDescriptor::FiniteTable(_) => true,
            QuantaleDescriptor::Product(l, r) => l.is_exact() && r.is_exact(),
            QuantaleDescriptor::Lifted(b) => b.is_exact(),
            QuantaleDescriptor::FunSpace { .. } => false,
        }
    }
}

impl fmt::Display for QuantaleDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantaleDescriptor::Lawvere => write!(f, "[0,inf]"),
            QuantaleDescriptor::Product(l, r) => write!(f, "({l} x {r})"),
            QuantaleDescriptor::FunSpace { inner, outer, .. } => {
                write!(f, "(carrier, {inner}) -/> {outer}")
            }
            QuantaleDescriptor::Lifted(b) => write!(f, "L{b}"),
            QuantaleDescriptor::FiniteTable(q) => write!(f, "finite[{}]", q.len()),
        }
    }
}

/// An error function: an element of a `FunSpace` quantale. Monotone in its
/// radius argument by convention; [`check_errfun_monotone`] spot-checks it.
#[derive(Clone)]
pub struct ErrFun {
    label: Rc<String>,
    f: Rc<dyn Fn(&SemValue, &QuantaleValue) -> QuantaleValue>,
}

impl ErrFun {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&SemValue, &QuantaleValue) -> QuantaleValue + 'static,
    ) -> Self {
        ErrFun {
            label: Rc::new(label.into()),
            f: Rc::new(f),
        }
    }

    pub fn apply(&self, x: &SemValue, a: &QuantaleValue) -> QuantaleValue {
        (self.f)(x, a)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// An element of some quantale; the tag must match the owning descriptor.
#[derive(Clone)]
pub enum QuantaleValue {
    Scalar(f64),
    Pair(Box<QuantaleValue>, Box<QuantaleValue>),
    ErrFun(ErrFun),
    Lift(Option<Box<QuantaleValue>>),
    Finite(usize),
}

impl QuantaleValue {
    /// Extended nonnegative scalar; negative inputs are a caller bug.
    pub fn scalar(x: f64) -> Self {
        assert!(x >= 0.0, "quantale scalars are nonnegative, got {x}");
        QuantaleValue::Scalar(x)
    }

    pub fn pair(l: QuantaleValue, r: QuantaleValue) -> Self {
        QuantaleValue::Pair(Box::new(l), Box::new(r))
    }

    pub fn err_fun(
        label: impl Into<String>,
        f: impl Fn(&SemValue, &QuantaleValue) -> QuantaleValue + 'static,
    ) -> Self {
        QuantaleValue::ErrFun(ErrFun::new(label, f))
    }

    /// The constant error function at a fixed output.
    pub fn const_err_fun(label: impl Into<String>, out: QuantaleValue) -> Self {
        QuantaleValue::err_fun(label, move |_, _| out.clone())
    }

    pub fn lift(content: Option<QuantaleValue>) -> Self {
        QuantaleValue::Lift(content.map(Box::new))
    }

    pub fn as_scalar(&self) -> f64 {
        match self {
            QuantaleValue::Scalar(x) => *x,
            other => panic!("expected a scalar radius, found {other}"),
        }
    }

    pub fn as_err_fun(&self) -> &ErrFun {
        match self {
            QuantaleValue::ErrFun(d) => d,
            other => panic!("expected an error function, found {other}"),
        }
    }

    pub fn as_pair(&self) -> (&QuantaleValue, &QuantaleValue) {
        match self {
            QuantaleValue::Pair(l, r) => (l, r),
            other => panic!("expected a pair radius, found {other}"),
        }
    }
}

impl fmt::Display for QuantaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            QuantaleValue::Scalar(x) => write!(f, "{x}"),
            QuantaleValue::Pair(l, r) => write!(f, "({l}, {r})"),
            QuantaleValue::ErrFun(d) => write!(f, "<errfun {}>", d.label()),
            QuantaleValue::Lift(None) => write!(f, "empty"),
            QuantaleValue::Lift(Some(v)) => write!(f, "some({v})"),
            QuantaleValue::Finite(i) => write!(f, "#{i}"),
        }
    }
}

impl fmt::Debug for QuantaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Configuration for sampled comparisons in function-space quantales.
/// Deterministic: every sampled operation reseeds from `seed`.
#[derive(Debug, Clone)]
pub struct FunSampler {
    pub seed: u64,
    pub points_per_domain: usize,
    pub box_lo: f64,
    pub box_hi: f64,
    pub chain_len: usize,
}

impl Default for FunSampler {
    fn default() -> Self {
        FunSampler {
            seed: 0,
            points_per_domain: 8,
            box_lo: -2.0,
            box_hi: 2.0,
            chain_len: 5,
        }
    }
}

impl FunSampler {
    pub fn with_seed(seed: u64) -> Self {
        FunSampler {
            seed,
            ..Default::default()
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    pub fn domain_points(&self, domain: &CarrierDescriptor) -> Vec<SemValue> {
        let mut rng = self.rng();
        (0..self.points_per_domain)
            .map(|_| domain.sample(&mut rng, self.box_lo, self.box_hi))
            .collect()
    }

    /// Sample radii of the given shape, always including unit and bottom.
    pub fn radii(&self, desc: &QuantaleDescriptor) -> Vec<QuantaleValue> {
        let mut rng = self.rng();
        let mut out = vec![unit(desc), bottom(desc)];
        for _ in 0..self.chain_len {
            out.push(random_radius(desc, &mut rng, self.box_hi.abs().max(1.0)));
        }
        out
    }
}

fn random_radius(desc: &QuantaleDescriptor, rng: &mut impl Rng, scale: f64) -> QuantaleValue {
    match desc {
        QuantaleDescriptor::Lawvere => QuantaleValue::scalar(rng.gen_range(0.0..=2.0 * scale)),
        QuantaleDescriptor::Product(l, r) => QuantaleValue::pair(
            random_radius(l, rng, scale),
            random_radius(r, rng, scale),
        ),
        QuantaleDescriptor::FunSpace { outer, .. } => {
            let out = random_radius(outer, rng, scale);
            QuantaleValue::const_err_fun("const-radius", out)
        }
        QuantaleDescriptor::Lifted(b) => {
            if rng.gen_bool(0.2) {
                QuantaleValue::lift(None)
            } else {
                QuantaleValue::lift(Some(random_radius(b, rng, scale)))
            }
        }
        QuantaleDescriptor::FiniteTable(q) => QuantaleValue::Finite(rng.gen_range(0..q.len())),
    }
}

fn shape_error(desc: &QuantaleDescriptor, value: &QuantaleValue) -> QuantaleError {
    QuantaleError::ShapeMismatch {
        descriptor: desc.to_string(),
        value: value.to_string(),
    }
}

/// Structural check that `value` has the shape `desc` demands. Error-function
/// bodies cannot be inspected without applying them, so they are trusted.
pub fn check_shape(desc: &QuantaleDescriptor, value: &QuantaleValue) -> Result<(), QuantaleError> {
    match (desc, value) {
        (QuantaleDescriptor::Lawvere, QuantaleValue::Scalar(x)) => {
            if *x < 0.0 || x.is_nan() {
                Err(shape_error(desc, value))
            } else {
                Ok(())
            }
        }
        (QuantaleDescriptor::Product(dl, dr), QuantaleValue::Pair(l, r)) => {
            check_shape(dl, l)?;
            check_shape(dr, r)
        }
        (QuantaleDescriptor::FunSpace { .. }, QuantaleValue::ErrFun(_)) => Ok(()),
        (QuantaleDescriptor::Lifted(_), QuantaleValue::Lift(None)) => Ok(()),
        (QuantaleDescriptor::Lifted(b), QuantaleValue::Lift(Some(v))) => check_shape(b, v),
        (QuantaleDescriptor::FiniteTable(q), QuantaleValue::Finite(i)) => {
            if *i < q.len() {
                Ok(())
            } else {
                Err(QuantaleError::BadFiniteIndex {
                    index: *i,
                    size: q.len(),
                })
            }
        }
        _ => Err(shape_error(desc, value)),
    }
}

/// The unit (= top, by integrality) of the quantale.
pub fn unit(desc: &QuantaleDescriptor) -> QuantaleValue {
    match desc {
        QuantaleDescriptor::Lawvere => QuantaleValue::Scalar(0.0),
        QuantaleDescriptor::Product(l, r) => QuantaleValue::pair(unit(l), unit(r)),
        QuantaleDescriptor::FunSpace { outer, .. } => {
            QuantaleValue::const_err_fun("unit", unit(outer))
        }
        QuantaleDescriptor::Lifted(b) => QuantaleValue::lift(Some(unit(b))),
        QuantaleDescriptor::FiniteTable(q) => QuantaleValue::Finite(q.unit()),
    }
}

/// The least element of the quantale.
pub fn bottom(desc: &QuantaleDescriptor) -> QuantaleValue {
    match desc {
        QuantaleDescriptor::Lawvere => QuantaleValue::Scalar(f64::INFINITY),
        QuantaleDescriptor::Product(l, r) => QuantaleValue::pair(bottom(l), bottom(r)),
        QuantaleDescriptor::FunSpace { outer, .. } => {
            QuantaleValue::const_err_fun("bottom", bottom(outer))
        }
        QuantaleDescriptor::Lifted(_) => QuantaleValue::lift(None),
        QuantaleDescriptor::FiniteTable(q) => QuantaleValue::Finite(q.bottom()),
    }
}

/// Order test `a ⊑ b`. Exact wherever the shape is exact; sampled at
/// function spaces, where a refutation carries the witnessing point.
pub fn leq(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
    sampler: &FunSampler,
) -> Result<Verdict, QuantaleError> {
    check_shape(desc, a)?;
    check_shape(desc, b)?;
    Ok(leq_checked(desc, a, b, sampler))
}

fn leq_checked(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
    sampler: &FunSampler,
) -> Verdict {
    match (desc, a, b) {
        (QuantaleDescriptor::Lawvere, QuantaleValue::Scalar(x), QuantaleValue::Scalar(y)) => {
            // Reversed order: x ⊑ y iff x >= y numerically.
            if x >= y {
                Verdict::Proved
            } else {
                Verdict::Refuted(Witness::object(vec![
                    ("left", serde_json::json!(x)),
                    ("right", serde_json::json!(y)),
                    ("reason", serde_json::json!("left < right in the reversed numeric order")),
                ]))
            }
        }
        (
            QuantaleDescriptor::Product(dl, dr),
            QuantaleValue::Pair(al, ar),
            QuantaleValue::Pair(bl, br),
        ) => leq_checked(dl, al, bl, sampler).and(leq_checked(dr, ar, br, sampler)),
        (QuantaleDescriptor::Lifted(_), QuantaleValue::Lift(None), _) => Verdict::Proved,
        (QuantaleDescriptor::Lifted(_), QuantaleValue::Lift(Some(_)), QuantaleValue::Lift(None)) => {
            Verdict::Refuted(Witness::text("some(_) is never below empty"))
        }
        (
            QuantaleDescriptor::Lifted(base),
            QuantaleValue::Lift(Some(x)),
            QuantaleValue::Lift(Some(y)),
        ) => leq_checked(base, x, y, sampler),
        (QuantaleDescriptor::FiniteTable(q), QuantaleValue::Finite(i), QuantaleValue::Finite(j)) => {
            if q.leq(*i, *j) {
                Verdict::Proved
            } else {
                Verdict::Refuted(Witness::object(vec![
                    ("left", serde_json::json!(q.name(*i))),
                    ("right", serde_json::json!(q.name(*j))),
                ]))
            }
        }
        (
            QuantaleDescriptor::FunSpace {
                domain,
                inner,
                outer,
            },
            QuantaleValue::ErrFun(f),
            QuantaleValue::ErrFun(g),
        ) => {
            let points = sampler.domain_points(domain);
            let radii = sampler.radii(inner);
            let mut samples = 0usize;
            for x in &points {
                for r in &radii {
                    let fire = leq_checked(outer, &f.apply(x, r), &g.apply(x, r), sampler);
                    match fire {
                        Verdict::Refuted(w) => {
                            return Verdict::Refuted(Witness::object(vec![
                                ("point", serde_json::json!(x.to_string())),
                                ("radius", serde_json::json!(r.to_string())),
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
        _ => unreachable!("shapes were checked"),
    }
}

/// Monoid multiplication.
pub fn tensor(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
) -> Result<QuantaleValue, QuantaleError> {
    check_shape(desc, a)?;
    check_shape(desc, b)?;
    Ok(tensor_checked(desc, a, b))
}

fn tensor_checked(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
) -> QuantaleValue {
    match (desc, a, b) {
        (QuantaleDescriptor::Lawvere, QuantaleValue::Scalar(x), QuantaleValue::Scalar(y)) => {
            QuantaleValue::Scalar(x + y)
        }
        (
            QuantaleDescriptor::Product(dl, dr),
            QuantaleValue::Pair(al, ar),
            QuantaleValue::Pair(bl, br),
        ) => QuantaleValue::pair(tensor_checked(dl, al, bl), tensor_checked(dr, ar, br)),
        (QuantaleDescriptor::Lifted(_), QuantaleValue::Lift(None), _)
        | (QuantaleDescriptor::Lifted(_), _, QuantaleValue::Lift(None)) => QuantaleValue::lift(None),
        (
            QuantaleDescriptor::Lifted(base),
            QuantaleValue::Lift(Some(x)),
            QuantaleValue::Lift(Some(y)),
        ) => QuantaleValue::lift(Some(tensor_checked(base, x, y))),
        (QuantaleDescriptor::FiniteTable(q), QuantaleValue::Finite(i), QuantaleValue::Finite(j)) => {
            QuantaleValue::Finite(q.tensor(*i, *j))
        }
        (QuantaleDescriptor::FunSpace { outer, .. }, QuantaleValue::ErrFun(f), QuantaleValue::ErrFun(g)) => {
            let outer = (**outer).clone();
            let (f, g) = (f.clone(), g.clone());
            QuantaleValue::err_fun(format!("({} (x) {})", f.label(), g.label()), move |x, a| {
                tensor_checked(&outer, &f.apply(x, a), &g.apply(x, a))
            })
        }
        _ => unreachable!("shapes were checked"),
    }
}

/// Meet of a family; the empty family yields the unit (= top).
pub fn meet(
    desc: &QuantaleDescriptor,
    family: &[QuantaleValue],
) -> Result<QuantaleValue, QuantaleError> {
    for v in family {
        check_shape(desc, v)?;
    }
    Ok(meet_checked(desc, family))
}

fn meet_checked(desc: &QuantaleDescriptor, family: &[QuantaleValue]) -> QuantaleValue {
    match desc {
        QuantaleDescriptor::Lawvere => {
            // Meet is the numeric supremum under the reversed order.
            QuantaleValue::Scalar(
                family
                    .iter()
                    .map(|v| v.as_scalar())
                    .fold(0.0f64, f64::max),
            )
        }
        QuantaleDescriptor::Product(dl, dr) => {
            let ls: Vec<QuantaleValue> = family.iter().map(|v| v.as_pair().0.clone()).collect();
            let rs: Vec<QuantaleValue> = family.iter().map(|v| v.as_pair().1.clone()).collect();
            QuantaleValue::pair(meet_checked(dl, &ls), meet_checked(dr, &rs))
        }
        QuantaleDescriptor::FunSpace { outer, .. } => {
            let outer = (**outer).clone();
            let fs: Vec<ErrFun> = family.iter().map(|v| v.as_err_fun().clone()).collect();
            QuantaleValue::err_fun("meet", move |x, a| {
                let vals: Vec<QuantaleValue> = fs.iter().map(|f| f.apply(x, a)).collect();
                meet_checked(&outer, &vals)
            })
        }
        QuantaleDescriptor::Lifted(base) => {
            // Meet is empty iff some member is empty.
            let mut contents = Vec::with_capacity(family.len());
            for v in family {
                match v {
                    QuantaleValue::Lift(None) => return QuantaleValue::lift(None),
                    QuantaleValue::Lift(Some(x)) => contents.push((**x).clone()),
                    _ => unreachable!("shapes were checked"),
                }
            }
            QuantaleValue::lift(Some(meet_checked(base, &contents)))
        }
        QuantaleDescriptor::FiniteTable(q) => QuantaleValue::Finite(
            q.meet_family(family.iter().map(|v| match v {
                QuantaleValue::Finite(i) => *i,
                _ => unreachable!("shapes were checked"),
            })),
        ),
    }
}

/// Join of a family; the empty family yields bottom.
pub fn join(
    desc: &QuantaleDescriptor,
    family: &[QuantaleValue],
) -> Result<QuantaleValue, QuantaleError> {
    for v in family {
        check_shape(desc, v)?;
    }
    Ok(join_checked(desc, family))
}

fn join_checked(desc: &QuantaleDescriptor, family: &[QuantaleValue]) -> QuantaleValue {
    match desc {
        QuantaleDescriptor::Lawvere => {
            // Join is the numeric infimum under the reversed order.
            QuantaleValue::Scalar(
                family
                    .iter()
                    .map(|v| v.as_scalar())
                    .fold(f64::INFINITY, f64::min),
            )
        }
        QuantaleDescriptor::Product(dl, dr) => {
            let ls: Vec<QuantaleValue> = family.iter().map(|v| v.as_pair().0.clone()).collect();
            let rs: Vec<QuantaleValue> = family.iter().map(|v| v.as_pair().1.clone()).collect();
            QuantaleValue::pair(join_checked(dl, &ls), join_checked(dr, &rs))
        }
        QuantaleDescriptor::FunSpace { outer, .. } => {
            let outer = (**outer).clone();
            let fs: Vec<ErrFun> = family.iter().map(|v| v.as_err_fun().clone()).collect();
            QuantaleValue::err_fun("join", move |x, a| {
                let vals: Vec<QuantaleValue> = fs.iter().map(|f| f.apply(x, a)).collect();
                join_checked(&outer, &vals)
            })
        }
        QuantaleDescriptor::Lifted(base) => {
            let mut contents = Vec::new();
            for v in family {
                match v {
                    QuantaleValue::Lift(None) => {}
                    QuantaleValue::Lift(Some(x)) => contents.push((**x).clone()),
                    _ => unreachable!("shapes were checked"),
                }
            }
            if contents.is_empty() {
                QuantaleValue::lift(None)
            } else {
                QuantaleValue::lift(Some(join_checked(base, &contents)))
            }
        }
        QuantaleDescriptor::FiniteTable(q) => QuantaleValue::Finite(
            q.join_family(family.iter().map(|v| match v {
                QuantaleValue::Finite(i) => *i,
                _ => unreachable!("shapes were checked"),
            })),
        ),
    }
}

/// Residual `a ⊸ b`: the join of all `z` with `a ⊗ z ⊑ b`.
///
/// Exact for every exact shape. At function spaces it follows the pointwise
/// recipe `(f ⊸ g)(x, a) = meet over b ⊒ a of f(x, b) ⊸ g(x, b)`, with the
/// meet taken over a sampled chain above `a`; the result is labelled as
/// sampled wherever it is compared.
pub fn residual(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
    sampler: &FunSampler,
) -> Result<QuantaleValue, QuantaleError> {
    check_shape(desc, a)?;
    check_shape(desc, b)?;
    Ok(residual_checked(desc, a, b, sampler))
}

fn residual_checked(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    b: &QuantaleValue,
    sampler: &FunSampler,
) -> QuantaleValue {
    match (desc, a, b) {
        (QuantaleDescriptor::Lawvere, QuantaleValue::Scalar(x), QuantaleValue::Scalar(y)) => {
            if x.is_infinite() {
                QuantaleValue::Scalar(0.0)
            } else {
                // Truncated subtraction.
                QuantaleValue::Scalar((y - x).max(0.0))
            }
        }
        (
            QuantaleDescriptor::Product(dl, dr),
            QuantaleValue::Pair(al, ar),
            QuantaleValue::Pair(bl, br),
        ) => QuantaleValue::pair(
            residual_checked(dl, al, bl, sampler),
            residual_checked(dr, ar, br, sampler),
        ),
        (QuantaleDescriptor::Lifted(base), QuantaleValue::Lift(ac), QuantaleValue::Lift(bc)) => {
            match (ac, bc) {
                // empty ⊗ z = empty ⊑ anything, so the residual is the top.
                (None, _) => QuantaleValue::lift(Some(unit(base))),
                (Some(_), None) => QuantaleValue::lift(None),
                (Some(x), Some(y)) => QuantaleValue::lift(Some(residual_checked(base, x, y, sampler))),
            }
        }
        (QuantaleDescriptor::FiniteTable(q), QuantaleValue::Finite(i), QuantaleValue::Finite(j)) => {
            QuantaleValue::Finite(q.residual(*i, *j))
        }
        (
            QuantaleDescriptor::FunSpace { inner, outer, .. },
            QuantaleValue::ErrFun(f),
            QuantaleValue::ErrFun(g),
        ) => {
            let inner = (**inner).clone();
            let outer = (**outer).clone();
            let (f, g) = (f.clone(), g.clone());
            let sampler = sampler.clone();
            QuantaleValue::err_fun(format!("({} -o {})", f.label(), g.label()), move |x, a| {
                let chain = chain_above(&inner, a, &sampler);
                let vals: Vec<QuantaleValue> = chain
                    .iter()
                    .map(|b| residual_checked(&outer, &f.apply(x, b), &g.apply(x, b), &sampler))
                    .collect();
                meet_checked(&outer, &vals)
            })
        }
        _ => unreachable!("shapes were checked"),
    }
}

/// A finite chain of radii above `a` (in the quantale order), always
/// containing `a` itself and the unit. Exhaustive on finite tables.
pub fn chain_above(
    desc: &QuantaleDescriptor,
    a: &QuantaleValue,
    sampler: &FunSampler,
) -> Vec<QuantaleValue> {
    match (desc, a) {
        (QuantaleDescriptor::Lawvere, QuantaleValue::Scalar(x)) => {
            if x.is_infinite() {
                // Everything sits above bottom; sample a spread plus the ends.
                let mut out: Vec<QuantaleValue> = (0..sampler.chain_len)
                    .map(|k| QuantaleValue::Scalar(k as f64))
                    .collect();
                out.push(QuantaleValue::Scalar(f64::INFINITY));
                out
            } else {
                let n = sampler.chain_len.max(2);
                (0..n)
                    .map(|k| QuantaleValue::Scalar(x * (n - 1 - k) as f64 / (n - 1) as f64))
                    .collect()
            }
        }
        (QuantaleDescriptor::Product(dl, dr), QuantaleValue::Pair(l, r)) => {
            let ls = chain_above(dl, l, sampler);
            let rs = chain_above(dr, r, sampler);
            ls.iter()
                .zip(rs.iter())
                .map(|(x, y)| QuantaleValue::pair(x.clone(), y.clone()))
                .collect()
        }
        (QuantaleDescriptor::FiniteTable(q), QuantaleValue::Finite(i)) => (0..q.len())
            .filter(|&j| q.leq(*i, j))
            .map(QuantaleValue::Finite)
            .collect(),
        (QuantaleDescriptor::Lifted(base), QuantaleValue::Lift(content)) => match content {
            None => {
                let mut out = vec![QuantaleValue::lift(None)];
                out.extend(
                    chain_above(base, &bottom(base), sampler)
                        .into_iter()
                        .map(|v| QuantaleValue::lift(Some(v))),
                );
                out
            }
            Some(x) => chain_above(base, x, sampler)
                .into_iter()
                .map(|v| QuantaleValue::lift(Some(v)))
                .collect(),
        },
        // No useful enumeration of radii above an arbitrary error function:
        // fall back to the two ends that are always comparable.
        (QuantaleDescriptor::FunSpace { .. }, a) => vec![a.clone(), unit(desc)],
        _ => vec![a.clone(), unit(desc)],
    }
}

/// Spot-check that an error function is monotone in its radius argument:
/// along sampled chains `a0 ⊑ a1 ⊑ ...` the outputs must not decrease.
pub fn check_errfun_monotone(
    domain: &CarrierDescriptor,
    inner: &QuantaleDescriptor,
    outer: &QuantaleDescriptor,
    f: &ErrFun,
    sampler: &FunSampler,
) -> Verdict {
    let points = sampler.domain_points(domain);
    let base = random_radius_from_seed(inner, sampler);
    let chain = chain_above(inner, &base, sampler);
    let mut samples = 0usize;
    for x in &points {
        for lo in &chain {
            for hi in &chain {
                if !leq_checked(inner, lo, hi, sampler).is_proved() {
                    continue;
                }
                // lo ⊑ hi must give f(x, lo) ⊑ f(x, hi).
                let v = leq_checked(outer, &f.apply(x, lo), &f.apply(x, hi), sampler);
                match v {
                    Verdict::Refuted(w) => {
                        return Verdict::Refuted(Witness::object(vec![
                            ("point", serde_json::json!(x.to_string())),
                            ("lo", serde_json::json!(lo.to_string())),
                            ("hi", serde_json::json!(hi.to_string())),
                            ("inner", w.0),
                        ]))
                    }
                    Verdict::Proved => samples += 1,
                    Verdict::SampledOk { samples: s } => samples += s,
                }
            }
        }
    }
    Verdict::SampledOk { samples }
}

fn random_radius_from_seed(desc: &QuantaleDescriptor, sampler: &FunSampler) -> QuantaleValue {
    let mut rng = ChaCha8Rng::seed_from_u64(sampler.seed.wrapping_add(1));
    random_radius(desc, &mut rng, sampler.box_hi.abs().max(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law() -> QuantaleDescriptor {
        QuantaleDescriptor::Lawvere
    }

    fn s(x: f64) -> QuantaleValue {
        QuantaleValue::scalar(x)
    }

    #[test]
    fn reversed_order_is_pinned() {
        let sampler = FunSampler::default();
        // 5 ⊑ 3 because 5 >= 3.
        assert!(leq(&law(), &s(5.0), &s(3.0), &sampler).unwrap().is_proved());
        assert!(!leq(&law(), &s(3.0), &s(5.0), &sampler).unwrap().holds());
        assert!(leq(&law(), &s(4.0), &s(4.0), &sampler).unwrap().is_proved());
    }

    #[test]
    fn product_order_is_componentwise() {
        let d = QuantaleDescriptor::product(law(), law());
        let sampler = FunSampler::default();
        let a = QuantaleValue::pair(s(4.0), s(1.0));
        let b = QuantaleValue::pair(s(2.0), s(1.0));
        assert!(leq(&d, &a, &b, &sampler).unwrap().is_proved());
        assert!(!leq(&d, &b, &a, &sampler).unwrap().holds());
    }

    #[test]
    fn tensor_is_addition_with_unit_zero() {
        assert_eq!(tensor(&law(), &s(2.0), &s(3.0)).unwrap().as_scalar(), 5.0);
        let a = s(7.25);
        assert_eq!(tensor(&law(), &unit(&law()), &a).unwrap().as_scalar(), 7.25);
        assert_eq!(
            tensor(&law(), &s(1.0), &s(f64::INFINITY)).unwrap().as_scalar(),
            f64::INFINITY
        );
    }

    #[test]
    fn lifted_tensor_absorbs_empty() {
        let d = QuantaleDescriptor::lifted(law());
        let two = QuantaleValue::lift(Some(s(2.0)));
        let empty = QuantaleValue::lift(None);
        let out = tensor(&d, &two, &empty).unwrap();
        assert!(matches!(out, QuantaleValue::Lift(None)));
        let sampler = FunSampler::default();
        // empty is bottom.
        assert!(leq(&d, &empty, &two, &sampler).unwrap().is_proved());
        assert!(!leq(&d, &two, &empty, &sampler).unwrap().holds());
    }

    #[test]
    fn meet_is_sup_join_is_inf() {
        let fam = vec![s(1.0), s(3.0)];
        assert_eq!(meet(&law(), &fam).unwrap().as_scalar(), 3.0);
        assert_eq!(join(&law(), &fam).unwrap().as_scalar(), 1.0);
        // Idempotence and empty families.
        assert_eq!(meet(&law(), &[s(2.0)]).unwrap().as_scalar(), 2.0);
        assert_eq!(meet(&law(), &[]).unwrap().as_scalar(), 0.0);
        assert_eq!(join(&law(), &[]).unwrap().as_scalar(), f64::INFINITY);
    }

    #[test]
    fn residual_is_truncated_subtraction() {
        let sampler = FunSampler::default();
        assert_eq!(residual(&law(), &s(2.0), &s(5.0), &sampler).unwrap().as_scalar(), 3.0);
        assert_eq!(
            residual(&law(), &s(f64::INFINITY), &s(7.0), &sampler).unwrap().as_scalar(),
            0.0
        );
        assert_eq!(residual(&law(), &s(5.0), &s(2.0), &sampler).unwrap().as_scalar(), 0.0);
        // residual(unit, b) = b.
        assert_eq!(
            residual(&law(), &unit(&law()), &s(9.5), &sampler).unwrap().as_scalar(),
            9.5
        );
    }

    #[test]
    fn funspace_ops_are_pointwise() {
        let d = QuantaleDescriptor::fun_space(CarrierDescriptor::Real, law(), law());
        let sampler = FunSampler::default();
        let f = QuantaleValue::err_fun("abs-scale", |x, a| {
            QuantaleValue::scalar(x.as_real().abs() + a.as_scalar())
        });
        let g = QuantaleValue::err_fun("abs-scale-larger", |x, a| {
            QuantaleValue::scalar(x.as_real().abs() + a.as_scalar() + 1.0)
        });
        // g is pointwise numerically larger, hence below f... careful: g ⊑ f.
        let v = leq(&d, &g, &f, &sampler).unwrap();
        assert!(matches!(v, Verdict::SampledOk { .. }));
        assert!(!leq(&d, &f, &g, &sampler).unwrap().holds());
        let t = tensor(&d, &f, &g).unwrap();
        let x = SemValue::Real(1.5);
        let a = QuantaleValue::scalar(0.5);
        assert_eq!(
            t.as_err_fun().apply(&x, &a).as_scalar(),
            (1.5 + 0.5) + (1.5 + 0.5 + 1.0)
        );
    }

    #[test]
    fn funspace_residual_adjunction_sampled() {
        // In the scalar slice the pointwise residual reduces to truncated
        // subtraction of the outputs along the chain above the radius.
        let d = QuantaleDescriptor::fun_space(CarrierDescriptor::Real, law(), law());
        let sampler = FunSampler::default();
        let f = QuantaleValue::const_err_fun("c2", QuantaleValue::scalar(2.0));
        let g = QuantaleValue::const_err_fun("c5", QuantaleValue::scalar(5.0));
        let r = residual(&d, &f, &g, &sampler).unwrap();
        let out = r
            .as_err_fun()
            .apply(&SemValue::Real(0.0), &QuantaleValue::scalar(1.0));
        assert_eq!(out.as_scalar(), 3.0);
        // Adjunction both ways on the constant slice: z ⊑ f ⊸ g iff f ⊗ z ⊑ g.
        let z = QuantaleValue::const_err_fun("c3", QuantaleValue::scalar(3.0));
        assert!(leq(&d, &z, &r, &sampler).unwrap().holds());
        let fz = tensor(&d, &f, &z).unwrap();
        assert!(leq(&d, &fz, &g, &sampler).unwrap().holds());
    }

    #[test]
    fn shape_mismatch_is_reported() {
        let err = tensor(&law(), &s(1.0), &QuantaleValue::pair(s(1.0), s(2.0)));
        assert!(matches!(err, Err(QuantaleError::ShapeMismatch { .. })));
    }

    #[test]
    fn monotonicity_check_accepts_and_rejects() {
        let dom = CarrierDescriptor::Real;
        let (inner, outer) = (law(), law());
        let sampler = FunSampler::default();
        let good = ErrFun::new("radius-echo", |_, a| a.clone());
        assert!(check_errfun_monotone(&dom, &inner, &outer, &good, &sampler).holds());
        // Jumps from 0 up to 5 exactly at radius 0, the top of every chain:
        // ascending chains see the output drop in the order, a refutation.
        let bad = ErrFun::new("step-at-unit", |_, a| {
            QuantaleValue::scalar(if a.as_scalar() <= 0.0 { 5.0 } else { 0.0 })
        });
        let v = check_errfun_monotone(&dom, &inner, &outer, &bad, &sampler);
        assert!(!v.holds());
    }
}
