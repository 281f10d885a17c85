//! The table of primitive real functions available to terms, together with
//! their evaluators and (optionally) analytic moduli of continuity.
//!
//! A modulus for `alpha` reports, given a point `xs` and per-argument radii
//! `rs`, the largest deviation `|alpha(xs) - alpha(ys)|` over the box
//! `|xs[i] - ys[i]| <= rs[i]`. Analytic moduli are exact closed forms or
//! certified over-approximations, so bounds built from them are sound upper
//! bounds. Grid evaluation (see [`grid_modulus`]) under-approximates and is
//! only ever used to cross-check analytic forms from below.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::rc::Rc;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PrimError {
    #[error("unknown primitive `{0}`")]
    Unknown(String),
    #[error("primitive `{name}` expects {expected} arguments, got {got}")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("primitive `{0}` has no analytic modulus")]
    NoModulus(String),
    #[error("bad primitive manifest: {0}")]
    Manifest(String),
}

type EvalFn = Rc<dyn Fn(&[f64]) -> f64>;
type ModulusFn = Rc<dyn Fn(&[f64], &[f64]) -> f64>;

#[derive(Clone)]
pub struct Primitive {
    pub name: String,
    pub arity: usize,
    pub eval: EvalFn,
    pub modulus: Option<ModulusFn>,
    pub lipschitz: Option<Vec<f64>>,
}

impl Primitive {
    pub fn new(
        name: impl Into<String>,
        arity: usize,
        eval: impl Fn(&[f64]) -> f64 + 'static,
    ) -> Self {
        Primitive {
            name: name.into(),
            arity,
            eval: Rc::new(eval),
            modulus: None,
            lipschitz: None,
        }
    }

    pub fn with_modulus(mut self, modulus: impl Fn(&[f64], &[f64]) -> f64 + 'static) -> Self {
        self.modulus = Some(Rc::new(modulus));
        self
    }

    pub fn with_lipschitz(mut self, constants: Vec<f64>) -> Self {
        self.lipschitz = Some(constants);
        self
    }

    pub fn call(&self, args: &[f64]) -> f64 {
        debug_assert_eq!(args.len(), self.arity);
        (self.eval)(args)
    }
}

impl std::fmt::Debug for Primitive {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Primitive")
            .field("name", &self.name)
            .field("arity", &self.arity)
            .field("has_modulus", &self.modulus.is_some())
            .finish()
    }
}

#[derive(Debug, Clone, Default)]
pub struct PrimitiveTable {
    entries: BTreeMap<String, Primitive>,
}

impl PrimitiveTable {
    /// The empty table: no primitive applications typecheck under it.
    pub fn empty() -> Self {
        PrimitiveTable::default()
    }

    /// The default table. `eps` parameterizes the forward-shift `add` and
    /// the divided-difference `diff`.
    pub fn default_with_eps(eps: f64) -> Self {
        assert!(eps > 0.0, "eps must be positive");
        let mut t = PrimitiveTable::empty();
        t.insert(
            Primitive::new("add", 1, move |xs| xs[0] + eps)
                .with_modulus(|_, rs| rs[0])
                .with_lipschitz(vec![1.0]),
        );
        t.insert(
            Primitive::new("diff", 2, move |xs| (xs[0] - xs[1]) / eps)
                .with_modulus(move |_, rs| (rs[0] + rs[1]) / eps)
                .with_lipschitz(vec![1.0 / eps, 1.0 / eps]),
        );
        t.insert(
            Primitive::new("sin", 1, |xs| xs[0].sin())
                .with_modulus(|xs, rs| sin_oscillation(xs[0], rs[0]))
                .with_lipschitz(vec![1.0]),
        );
        t.insert(
            Primitive::new("mul", 2, |xs| xs[0] * xs[1])
                .with_modulus(|xs, rs| mul_oscillation(xs[0], xs[1], rs[0], rs[1])),
        );
        t.insert(
            Primitive::new("add2", 2, |xs| xs[0] + xs[1])
                .with_modulus(|_, rs| rs[0] + rs[1])
                .with_lipschitz(vec![1.0, 1.0]),
        );
        t.insert(
            Primitive::new("neg", 1, |xs| -xs[0])
                .with_modulus(|_, rs| rs[0])
                .with_lipschitz(vec![1.0]),
        );
        t.insert(
            Primitive::new("const_c", 1, |_| 1.0)
                .with_modulus(|_, _| 0.0)
                .with_lipschitz(vec![0.0]),
        );
        t.insert(
            Primitive::new("abs", 1, |xs| xs[0].abs())
                .with_modulus(|_, rs| rs[0])
                .with_lipschitz(vec![1.0]),
        );
        t.insert(
            Primitive::new("id", 1, |xs| xs[0])
                .with_modulus(|_, rs| rs[0])
                .with_lipschitz(vec![1.0]),
        );
        t
    }

    pub fn insert(&mut self, prim: Primitive) {
        self.entries.insert(prim.name.clone(), prim);
    }

    pub fn get(&self, name: &str) -> Option<&Primitive> {
        self.entries.get(name)
    }

    pub fn lookup(&self, name: &str) -> Result<&Primitive, PrimError> {
        self.get(name).ok_or_else(|| PrimError::Unknown(name.to_string()))
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(|s| s.as_str())
    }

    /// Extends the default set with entries from a JSON manifest. Each entry
    /// names one of the builtin evaluators and may tune its parameters:
    ///
    /// ```json
    /// [
    ///   {"name": "shift", "builtin": "add_eps", "eps": 0.5},
    ///   {"name": "double", "builtin": "affine", "slope": 2.0, "offset": 0.0}
    /// ]
    /// ```
    pub fn from_manifest(json: &str) -> Result<Self, PrimError> {
        #[derive(Deserialize)]
        struct Entry {
            name: String,
            builtin: String,
            #[serde(default)]
            eps: Option<f64>,
            #[serde(default)]
            c: Option<f64>,
            #[serde(default)]
            slope: Option<f64>,
            #[serde(default)]
            offset: Option<f64>,
        }
        let entries: Vec<Entry> =
            serde_json::from_str(json).map_err(|e| PrimError::Manifest(e.to_string()))?;
        let mut t = PrimitiveTable::empty();
        for e in entries {
            let prim = match e.builtin.as_str() {
                "sin" => Primitive::new(e.name.clone(), 1, |xs| xs[0].sin())
                    .with_modulus(|xs, rs| sin_oscillation(xs[0], rs[0]))
                    .with_lipschitz(vec![1.0]),
                "cos" => Primitive::new(e.name.clone(), 1, |xs| xs[0].cos())
                    .with_modulus(|xs, rs| sin_oscillation(xs[0] + FRAC_PI_2, rs[0]))
                    .with_lipschitz(vec![1.0]),
                "add_eps" => {
                    let eps = e.eps.unwrap_or(0.1);
                    if eps <= 0.0 {
                        return Err(PrimError::Manifest(format!(
                            "add_eps `{}` needs eps > 0",
                            e.name
                        )));
                    }
                    Primitive::new(e.name.clone(), 1, move |xs| xs[0] + eps)
                        .with_modulus(|_, rs| rs[0])
                        .with_lipschitz(vec![1.0])
                }
                "diff_eps" => {
                    let eps = e.eps.unwrap_or(0.1);
                    if eps <= 0.0 {
                        return Err(PrimError::Manifest(format!(
                            "diff_eps `{}` needs eps > 0",
                            e.name
                        )));
                    }
                    Primitive::new(e.name.clone(), 2, move |xs| (xs[0] - xs[1]) / eps)
                        .with_modulus(move |_, rs| (rs[0] + rs[1]) / eps)
                        .with_lipschitz(vec![1.0 / eps, 1.0 / eps])
                }
                "mul" => Primitive::new(e.name.clone(), 2, |xs| xs[0] * xs[1])
                    .with_modulus(|xs, rs| mul_oscillation(xs[0], xs[1], rs[0], rs[1])),
                "add2" => Primitive::new(e.name.clone(), 2, |xs| xs[0] + xs[1])
                    .with_modulus(|_, rs| rs[0] + rs[1])
                    .with_lipschitz(vec![1.0, 1.0]),
                "neg" => Primitive::new(e.name.clone(), 1, |xs| -xs[0])
                    .with_modulus(|_, rs| rs[0])
                    .with_lipschitz(vec![1.0]),
                "abs" => Primitive::new(e.name.clone(), 1, |xs| xs[0].abs())
                    .with_modulus(|_, rs| rs[0])
                    .with_lipschitz(vec![1.0]),
                "id" => Primitive::new(e.name.clone(), 1, |xs| xs[0])
                    .with_modulus(|_, rs| rs[0])
                    .with_lipschitz(vec![1.0]),
                "const" => {
                    let c = e.c.unwrap_or(1.0);
                    Primitive::new(e.name.clone(), 1, move |_| c)
                        .with_modulus(|_, _| 0.0)
                        .with_lipschitz(vec![0.0])
                }
                "affine" => {
                    let k = e.slope.unwrap_or(1.0);
                    let m = e.offset.unwrap_or(0.0);
                    Primitive::new(e.name.clone(), 1, move |xs| k * xs[0] + m)
                        .with_modulus(move |_, rs| k.abs() * rs[0])
                        .with_lipschitz(vec![k.abs()])
                }
                other => return Err(PrimError::Manifest(format!("unknown builtin `{other}`"))),
            };
            t.insert(prim);
        }
        Ok(t)
    }
}

/// Exact oscillation of sine over the interval `[x - r, x + r]`:
/// `sup |sin x - sin y|` there, from the monotonicity segments of sine,
/// capped by the global bound 2.
pub fn sin_oscillation(x: f64, r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    if !r.is_finite() || 2.0 * r >= 2.0 * PI {
        // Interval spans a full period: both extrema are reached.
        return (1.0 - x.sin()).max(x.sin() + 1.0).min(2.0);
    }
    let (lo, hi) = (x - r, x + r);
    let contains_crest = |center: f64| -> bool {
        // Is there an integer k with lo <= center + 2 pi k <= hi?
        let k = ((lo - center) / (2.0 * PI)).ceil();
        center + 2.0 * PI * k <= hi
    };
    let max_sin = if contains_crest(FRAC_PI_2) {
        1.0
    } else {
        lo.sin().max(hi.sin())
    };
    let min_sin = if contains_crest(-FRAC_PI_2) {
        -1.0
    } else {
        lo.sin().min(hi.sin())
    };
    (max_sin - x.sin()).max(x.sin() - min_sin).max(0.0).min(2.0)
}

/// Oscillation of the product over the box: bilinear in `(y0, y1)`, so the
/// supremum of `|x0 x1 - y0 y1|` is attained at a corner of the box.
pub fn mul_oscillation(x0: f64, x1: f64, r0: f64, r1: f64) -> f64 {
    if r0.is_infinite() {
        return if x1 == 0.0 && r1 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    if r1.is_infinite() {
        return if x0 == 0.0 && r0 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    let base = x0 * x1;
    let mut worst: f64 = 0.0;
    for s0 in [-1.0, 1.0] {
        for s1 in [-1.0, 1.0] {
            let y = (x0 + s0 * r0) * (x1 + s1 * r1);
            worst = worst.max((base - y).abs());
        }
    }
    worst
}

/// Grid evaluation of a modulus: samples `resolution` points per axis over
/// the box and takes the worst deviation. An under-approximation by
/// construction; unbounded radii are clamped to a wide finite sweep.
pub fn grid_modulus(prim: &Primitive, xs: &[f64], rs: &[f64], resolution: usize) -> f64 {
    const INF_SWEEP: f64 = 1.0e3;
    let n = prim.arity;
    debug_assert_eq!(xs.len(), n);
    debug_assert_eq!(rs.len(), n);
    if n == 0 {
        return 0.0;
    }
    let res = resolution.max(2);
    let base = prim.call(xs);
    let mut ys = xs.to_vec();
    let mut worst = 0.0f64;
    let clamped: Vec<f64> = rs.iter().map(|r| r.min(INF_SWEEP)).collect();
    let mut idx = vec![0usize; n];
    loop {
        for (i, &k) in idx.iter().enumerate() {
            let t = k as f64 / (res - 1) as f64;
            ys[i] = xs[i] - clamped[i] + 2.0 * clamped[i] * t;
        }
        worst = worst.max((base - prim.call(&ys)).abs());
        // Odometer over the n-dimensional grid.
        let mut carry = 0;
        while carry < n {
            idx[carry] += 1;
            if idx[carry] < res {
                break;
            }
            idx[carry] = 0;
            carry += 1;
        }
        if carry == n {
            break;
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_oscillation_matches_grid_from_above() {
        let table = PrimitiveTable::default_with_eps(0.1);
        let sin = table.get("sin").unwrap();
        for (x, r) in [(0.0, FRAC_PI_2), (1.0, 0.3), (-2.0, 4.0), (3.0, 0.01), (0.5, 20.0)] {
            let analytic = sin_oscillation(x, r);
            let grid = grid_modulus(sin, &[x], &[r], 4001);
            assert!(
                analytic >= grid - 1e-9,
                "analytic {analytic} under grid {grid} at ({x}, {r})"
            );
            assert!(analytic - grid < 1e-3, "analytic {analytic} loose vs {grid}");
        }
        // At the origin with radius pi/2 the supremum is exactly 1.
        assert!((sin_oscillation(0.0, FRAC_PI_2) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diff_modulus_is_box_corner_value() {
        let table = PrimitiveTable::default_with_eps(0.1);
        let diff = table.get("diff").unwrap();
        let m = diff.modulus.as_ref().unwrap();
        let analytic = m(&[1.0, 2.0], &[0.3, 0.4]);
        assert!((analytic - (0.3 + 0.4) / 0.1).abs() < 1e-12);
        let grid = grid_modulus(diff, &[1.0, 2.0], &[0.3, 0.4], 201);
        assert!(analytic >= grid - 1e-9);
        assert!((analytic - grid).abs() < 1e-6, "corners are on the grid");
    }

    #[test]
    fn mul_modulus_dominates_grid() {
        let table = PrimitiveTable::default_with_eps(0.1);
        let mul = table.get("mul").unwrap();
        for (x, y, a, b) in [(2.0, 3.0, 0.5, 0.1), (0.0, 0.0, 1.0, 1.0), (-1.5, 2.0, 2.0, 0.0)] {
            let analytic = mul_oscillation(x, y, a, b);
            let grid = grid_modulus(mul, &[x, y], &[a, b], 101);
            assert!(analytic >= grid - 1e-9);
        }
        assert_eq!(mul_oscillation(1.0, 1.0, f64::INFINITY, 0.5), f64::INFINITY);
        assert_eq!(mul_oscillation(1.0, 0.0, f64::INFINITY, 0.0), 0.0);
    }

    #[test]
    fn const_has_zero_oscillation() {
        let table = PrimitiveTable::default_with_eps(0.1);
        let c = table.get("const_c").unwrap();
        let m = c.modulus.as_ref().unwrap();
        assert_eq!(m(&[3.0], &[100.0]), 0.0);
        assert_eq!(m(&[3.0], &[f64::INFINITY]), 0.0);
    }

    #[test]
    fn moduli_are_monotone_in_each_radius() {
        let table = PrimitiveTable::default_with_eps(0.1);
        for name in ["sin", "mul", "add2", "diff", "abs", "id", "neg"] {
            let p = table.get(name).unwrap();
            let m = p.modulus.as_ref().unwrap();
            let xs = vec![0.7; p.arity];
            for axis in 0..p.arity {
                let mut lo = vec![0.2; p.arity];
                let mut hi = lo.clone();
                lo[axis] = 0.1;
                hi[axis] = 1.7;
                assert!(
                    m(&xs, &lo) <= m(&xs, &hi) + 1e-12,
                    "{name} modulus not monotone on axis {axis}"
                );
            }
        }
    }

    #[test]
    fn manifest_builds_table() {
        let json = r#"[
            {"name": "shift", "builtin": "add_eps", "eps": 0.5},
            {"name": "double", "builtin": "affine", "slope": 2.0},
            {"name": "seven", "builtin": "const", "c": 7.0}
        ]"#;
        let t = PrimitiveTable::from_manifest(json).unwrap();
        assert_eq!(t.get("shift").unwrap().call(&[1.0]), 1.5);
        assert_eq!(t.get("double").unwrap().call(&[3.0]), 6.0);
        assert_eq!(t.get("seven").unwrap().call(&[0.0]), 7.0);
        assert!(PrimitiveTable::from_manifest(r#"[{"name":"x","builtin":"nope"}]"#).is_err());
    }
}
