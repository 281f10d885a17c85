//! Semantic values: denotations of terms under the set-theoretic
//! interpretation, and descriptors for the carrier sets they live in.

use std::fmt;
use std::rc::Rc;

use rand::Rng;

/// A function value. The closure captures whatever environment it needs; the
/// label is carried along purely so witnesses and reports stay readable.
#[derive(Clone)]
pub struct FunSem {
    label: Rc<String>,
    f: Rc<dyn Fn(&SemValue) -> SemValue>,
}

impl FunSem {
    pub fn new(label: impl Into<String>, f: impl Fn(&SemValue) -> SemValue + 'static) -> Self {
        FunSem {
            label: Rc::new(label.into()),
            f: Rc::new(f),
        }
    }

    pub fn apply(&self, arg: &SemValue) -> SemValue {
        (self.f)(arg)
    }

    pub fn label(&self) -> &str {
        &self.label
    }
}

/// A denotation: a real, a pair, or a function.
#[derive(Clone)]
pub enum SemValue {
    Real(f64),
    Pair(Box<SemValue>, Box<SemValue>),
    Fun(FunSem),
}

impl SemValue {
    pub fn real(x: f64) -> Self {
        SemValue::Real(x)
    }

    pub fn pair(l: SemValue, r: SemValue) -> Self {
        SemValue::Pair(Box::new(l), Box::new(r))
    }

    pub fn fun(label: impl Into<String>, f: impl Fn(&SemValue) -> SemValue + 'static) -> Self {
        SemValue::Fun(FunSem::new(label, f))
    }

    /// Convenience for functions on the reals.
    pub fn real_fun(label: impl Into<String>, f: impl Fn(f64) -> f64 + 'static) -> Self {
        SemValue::fun(label, move |v| SemValue::Real(f(v.as_real())))
    }

    pub fn as_real(&self) -> f64 {
        match self {
            SemValue::Real(x) => *x,
            other => panic!("expected a real value, found {other}"),
        }
    }

    pub fn as_fun(&self) -> &FunSem {
        match self {
            SemValue::Fun(f) => f,
            other => panic!("expected a function value, found {other}"),
        }
    }

    pub fn apply(&self, arg: &SemValue) -> SemValue {
        self.as_fun().apply(arg)
    }

    pub fn fst(&self) -> &SemValue {
        match self {
            SemValue::Pair(l, _) => l,
            other => panic!("expected a pair value, found {other}"),
        }
    }

    pub fn snd(&self) -> &SemValue {
        match self {
            SemValue::Pair(_, r) => r,
            other => panic!("expected a pair value, found {other}"),
        }
    }
}

impl fmt::Display for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SemValue::Real(x) => write!(f, "{x}"),
            SemValue::Pair(l, r) => write!(f, "({l}, {r})"),
            SemValue::Fun(g) => write!(f, "<fun {}>", g.label()),
        }
    }
}

impl fmt::Debug for SemValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Shape of a carrier set: mirrors the type structure of the calculus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CarrierDescriptor {
    Real,
    Pair(Box<CarrierDescriptor>, Box<CarrierDescriptor>),
    Fun(Box<CarrierDescriptor>, Box<CarrierDescriptor>),
}

impl CarrierDescriptor {
    pub fn pair(l: CarrierDescriptor, r: CarrierDescriptor) -> Self {
        CarrierDescriptor::Pair(Box::new(l), Box::new(r))
    }

    pub fn fun(dom: CarrierDescriptor, cod: CarrierDescriptor) -> Self {
        CarrierDescriptor::Fun(Box::new(dom), Box::new(cod))
    }

    /// Draws a value of this shape. Ground slots are uniform over `box_lo ..=
    /// box_hi`; function slots come from a small library of one-dimensional
    /// functions (constants, scalings, shifted sine) so that comparisons at
    /// function carriers exercise genuinely different behaviours.
    pub fn sample(&self, rng: &mut impl Rng, box_lo: f64, box_hi: f64) -> SemValue {
        match self {
            CarrierDescriptor::Real => SemValue::Real(rng.gen_range(box_lo..=box_hi)),
            CarrierDescriptor::Pair(l, r) => SemValue::pair(
                l.sample(rng, box_lo, box_hi),
                r.sample(rng, box_lo, box_hi),
            ),
            CarrierDescriptor::Fun(dom, cod) => {
                sample_function(dom, cod, rng, box_lo, box_hi)
            }
        }
    }
}

fn sample_function(
    dom: &CarrierDescriptor,
    cod: &CarrierDescriptor,
    rng: &mut impl Rng,
    box_lo: f64,
    box_hi: f64,
) -> SemValue {
    match (dom, cod) {
        (CarrierDescriptor::Real, CarrierDescriptor::Real) => {
            match rng.gen_range(0u8..4) {
                0 => {
                    let c = rng.gen_range(box_lo..=box_hi);
                    SemValue::real_fun(format!("const {c:.3}"), move |_| c)
                }
                1 => {
                    let k = rng.gen_range(-2.0..=2.0);
                    SemValue::real_fun(format!("scale {k:.3}"), move |x| k * x)
                }
                2 => {
                    let s = rng.gen_range(box_lo..=box_hi);
                    SemValue::real_fun(format!("sin(+{s:.3})"), move |x| (x + s).sin())
                }
                _ => SemValue::real_fun("id", |x| x),
            }
        }
        // Constant functionals cover higher shapes well enough for sampling.
        _ => {
            let out = cod.sample(rng, box_lo, box_hi);
            SemValue::fun("const-fn", move |_| out.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sampling_matches_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let desc = CarrierDescriptor::pair(
            CarrierDescriptor::Real,
            CarrierDescriptor::fun(CarrierDescriptor::Real, CarrierDescriptor::Real),
        );
        let v = desc.sample(&mut rng, -1.0, 1.0);
        assert!(matches!(v, SemValue::Pair(_, _)));
        let f = v.snd();
        let y = f.apply(&SemValue::Real(0.5));
        assert!(matches!(y, SemValue::Real(_)));
    }
}
