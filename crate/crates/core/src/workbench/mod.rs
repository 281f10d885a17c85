//! Brute-force laboratory for quasi-quasi-metric spaces on finite carriers
//! with finite quantales. Everything here is exhaustive: axiom checks
//! enumerate all tuples, translations are exact, and failures carry the
//! witnessing tuple by name.

pub mod construct;

pub use construct::{
    category_laws, closure_theorem_suite, enumerate_morphisms, exponential, morphism_compose,
    morphism_identity, product, terminal, weak_coproduct, CapsConfig, ClosureReport,
    ConstructError, FiniteMorphism, WeakCoproduct,
};

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quantale::{FiniteQuantale, FiniteQuantaleSpec};
use crate::verdict::Witness;

#[derive(Debug, Error)]
pub enum SpaceError {
    #[error("unknown carrier label `{0}`")]
    UnknownLabel(String),
    #[error("unknown quantale element `{0}`")]
    UnknownElement(String),
    #[error("predicate is not downward closed: ({x}, {a}, {y}) holds but ({x}, {b}, {y}) does not")]
    NotDownwardClosed { x: String, a: String, b: String, y: String },
    #[error("predicate is not join closed at ({x}, {y}): {a} and {b} hold but their join {j} does not")]
    NotJoinClosed { x: String, y: String, a: String, b: String, j: String },
    #[error("predicate misses the bottom radius at ({x}, {y})")]
    MissingBottom { x: String, y: String },
    #[error("space is not quasi-reflexive: witness ({x}, {a}, {y})")]
    NotQuasiReflexive { x: String, a: String, y: String },
    #[error("space is not transitive: witness ({x}, {a}, {y}), ({y}, {b}, {z})")]
    NotTransitive { x: String, a: String, b: String, y: String, z: String },
    #[error("bad space file: {0}")]
    Format(String),
    #[error(transparent)]
    Quantale(#[from] crate::quantale::FiniteQuantaleError),
}

/// A finite carrier with a finite quantale and a ternary predicate table.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteQqmSpace {
    carrier: Vec<String>,
    quantale: FiniteQuantale,
    /// Row-major over `(x, a, y)`.
    predicate: Vec<bool>,
}

impl FiniteQqmSpace {
    /// Builds a space and checks all invariants: the predicate must be
    /// closed (downward, under joins, bottom-total), quasi-reflexive, and
    /// transitive.
    pub fn new(
        carrier: Vec<String>,
        quantale: FiniteQuantale,
        triples: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Result<Self, SpaceError> {
        let space = Self::raw(carrier, quantale, triples);
        space.check_closed()?;
        space.check_qqm()?;
        Ok(space)
    }

    /// No checks: for counterexample mining on arbitrary tables. Every
    /// theorem suite revalidates closure before trusting one of these.
    pub fn raw(
        carrier: Vec<String>,
        quantale: FiniteQuantale,
        triples: impl IntoIterator<Item = (usize, usize, usize)>,
    ) -> Self {
        let (nx, nq) = (carrier.len(), quantale.len());
        let mut predicate = vec![false; nx * nq * nx];
        for (x, a, y) in triples {
            predicate[(x * nq + a) * nx + y] = true;
        }
        FiniteQqmSpace {
            carrier,
            quantale,
            predicate,
        }
    }

    pub fn carrier(&self) -> &[String] {
        &self.carrier
    }

    pub fn quantale(&self) -> &FiniteQuantale {
        &self.quantale
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.carrier.iter().position(|l| l == label)
    }

    pub fn holds(&self, x: usize, a: usize, y: usize) -> bool {
        self.predicate[(x * self.quantale.len() + a) * self.carrier.len() + y]
    }

    fn set(&mut self, x: usize, a: usize, y: usize, v: bool) {
        let i = (x * self.quantale.len() + a) * self.carrier.len() + y;
        self.predicate[i] = v;
    }

    /// The distance table: `hat(x, y)` is the join of all admissible radii.
    pub fn hat(&self, x: usize, y: usize) -> usize {
        self.quantale
            .join_family((0..self.quantale.len()).filter(|&a| self.holds(x, a, y)))
    }

    /// Self-distance of a point.
    pub fn sigma(&self, x: usize) -> usize {
        self.hat(x, x)
    }

    /// Closes the predicate downward, under binary joins, and with the
    /// bottom radius everywhere.
    pub fn close(&mut self) {
        let (nx, nq) = (self.carrier.len(), self.quantale.len());
        for x in 0..nx {
            for y in 0..nx {
                self.set(x, self.quantale.bottom(), y, true);
            }
        }
        loop {
            let mut changed = false;
            for x in 0..nx {
                for y in 0..nx {
                    for a in 0..nq {
                        if !self.holds(x, a, y) {
                            continue;
                        }
                        for b in 0..nq {
                            if self.quantale.leq(b, a) && !self.holds(x, b, y) {
                                self.set(x, b, y, true);
                                changed = true;
                            }
                            if self.holds(x, b, y) {
                                let j = self.quantale.join2(a, b);
                                if !self.holds(x, j, y) {
                                    self.set(x, j, y, true);
                                    changed = true;
                                }
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }
    }

    pub fn check_closed(&self) -> Result<(), SpaceError> {
        let (nx, nq) = (self.carrier.len(), self.quantale.len());
        let name = |i: usize| self.carrier[i].clone();
        let elem = |a: usize| self.quantale.name(a).to_string();
        for x in 0..nx {
            for y in 0..nx {
                if !self.holds(x, self.quantale.bottom(), y) {
                    return Err(SpaceError::MissingBottom { x: name(x), y: name(y) });
                }
                for a in 0..nq {
                    if !self.holds(x, a, y) {
                        continue;
                    }
                    for b in 0..nq {
                        if self.quantale.leq(b, a) && !self.holds(x, b, y) {
                            return Err(SpaceError::NotDownwardClosed {
                                x: name(x),
                                a: elem(a),
                                b: elem(b),
                                y: name(y),
                            });
                        }
                        if self.holds(x, b, y) {
                            let j = self.quantale.join2(a, b);
                            if !self.holds(x, j, y) {
                                return Err(SpaceError::NotJoinClosed {
                                    x: name(x),
                                    y: name(y),
                                    a: elem(a),
                                    b: elem(b),
                                    j: elem(j),
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn check_qqm(&self) -> Result<(), SpaceError> {
        let outcomes = check_axioms(self, &[Axiom::QuasiReflexive, Axiom::Transitive]);
        for (ax, out) in outcomes {
            if !out.holds {
                let w = out.witness.unwrap_or_default();
                let get = |k: &str| w[k].as_str().unwrap_or("?").to_string();
                return Err(match ax {
                    Axiom::QuasiReflexive => SpaceError::NotQuasiReflexive {
                        x: get("x"),
                        a: get("a"),
                        y: get("y"),
                    },
                    _ => SpaceError::NotTransitive {
                        x: get("x"),
                        a: get("a"),
                        b: get("b"),
                        y: get("y"),
                        z: get("z"),
                    },
                });
            }
        }
        Ok(())
    }

    pub fn is_qqm(&self) -> bool {
        self.check_closed().is_ok() && self.check_qqm().is_ok()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&SpaceFile::from_space(self)).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, SpaceError> {
        let file: SpaceFile =
            serde_json::from_str(text).map_err(|e| SpaceError::Format(e.to_string()))?;
        file.into_space()
    }
}

/// A quantale-valued relation on a finite carrier: the functional
/// presentation of the same data.
#[derive(Debug, Clone, PartialEq)]
pub struct QRelation {
    pub carrier: Vec<String>,
    pub quantale: FiniteQuantale,
    /// Row-major over `(x, y)`.
    pub values: Vec<usize>,
}

impl QRelation {
    pub fn value(&self, x: usize, y: usize) -> usize {
        self.values[x * self.carrier.len() + y]
    }

    pub fn set(&mut self, x: usize, y: usize, v: usize) {
        let n = self.carrier.len();
        self.values[x * n + y] = v;
    }

    pub fn new_filled(carrier: Vec<String>, quantale: FiniteQuantale, fill: usize) -> Self {
        let n = carrier.len();
        QRelation {
            carrier,
            quantale,
            values: vec![fill; n * n],
        }
    }
}

/// The relation induced by a closed predicate: pointwise joins of the
/// admissible radii.
pub fn hat(space: &FiniteQqmSpace) -> QRelation {
    let n = space.carrier.len();
    let mut values = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            values.push(space.hat(x, y));
        }
    }
    QRelation {
        carrier: space.carrier.to_vec(),
        quantale: space.quantale.clone(),
        values,
    }
}

/// The closed predicate induced by a relation: all radii below the value.
pub fn predicate_of(rel: &QRelation) -> FiniteQqmSpace {
    let n = rel.carrier.len();
    let nq = rel.quantale.len();
    let mut triples = Vec::new();
    for x in 0..n {
        for y in 0..n {
            let v = rel.value(x, y);
            for a in 0..nq {
                if rel.quantale.leq(a, v) {
                    triples.push((x, a, y));
                }
            }
        }
    }
    FiniteQqmSpace::raw(rel.carrier.clone(), rel.quantale.clone(), triples)
}

/// Left/right observational quasi-metrics of an arbitrary relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

pub fn observational(rel: &QRelation, side: Side) -> QRelation {
    let n = rel.carrier.len();
    let q = &rel.quantale;
    let mut out = rel.clone();
    for x in 0..n {
        for y in 0..n {
            let v = q.meet_family((0..n).map(|z| match side {
                Side::Left => q.residual(rel.value(y, z), rel.value(x, z)),
                Side::Right => q.residual(rel.value(z, x), rel.value(z, y)),
            }));
            out.set(x, y, v);
        }
    }
    out
}

/// The axioms the workbench can check exhaustively.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    Reflexive,
    QuasiReflexive,
    Transitive,
    /// Left strong transitivity in predicate form: from
    /// `(x, a ⊗ hat(y,y), y)` and `(y, b, z)` conclude `(x, a ⊗ b, z)`.
    Lst,
    St1,
    St2,
    St3,
    St4,
    SelfIndistancy,
    WeakSymmetry,
}

impl Axiom {
    pub const ALL: [Axiom; 10] = [
        Axiom::Reflexive,
        Axiom::QuasiReflexive,
        Axiom::Transitive,
        Axiom::Lst,
        Axiom::St1,
        Axiom::St2,
        Axiom::St3,
        Axiom::St4,
        Axiom::SelfIndistancy,
        Axiom::WeakSymmetry,
    ];

    pub fn parse(name: &str) -> Option<Axiom> {
        match name.to_ascii_lowercase().as_str() {
            "reflexive" => Some(Axiom::Reflexive),
            "quasireflexive" | "quasi-reflexive" => Some(Axiom::QuasiReflexive),
            "transitive" => Some(Axiom::Transitive),
            "lst" => Some(Axiom::Lst),
            "st1" => Some(Axiom::St1),
            "st2" => Some(Axiom::St2),
            "st3" => Some(Axiom::St3),
            "st4" => Some(Axiom::St4),
            "selfindistancy" | "self-indistancy" => Some(Axiom::SelfIndistancy),
            "weaksymmetry" | "weak-symmetry" => Some(Axiom::WeakSymmetry),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Axiom::Reflexive => "Reflexive",
            Axiom::QuasiReflexive => "QuasiReflexive",
            Axiom::Transitive => "Transitive",
            Axiom::Lst => "LST",
            Axiom::St1 => "ST1",
            Axiom::St2 => "ST2",
            Axiom::St3 => "ST3",
            Axiom::St4 => "ST4",
            Axiom::SelfIndistancy => "SelfIndistancy",
            Axiom::WeakSymmetry => "WeakSymmetry",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AxiomOutcome {
    pub holds: bool,
    pub witness: Option<serde_json::Value>,
}

/// Exhaustively checks the requested axioms; failures carry the witnessing
/// tuple, with relation values included for the strong-transitivity family.
pub fn check_axioms(space: &FiniteQqmSpace, which: &[Axiom]) -> BTreeMap<Axiom, AxiomOutcome> {
    let mut out = BTreeMap::new();
    for ax in which {
        out.insert(*ax, check_axiom(space, *ax));
    }
    out
}

fn check_axiom(space: &FiniteQqmSpace, ax: Axiom) -> AxiomOutcome {
    let n = space.carrier.len();
    let nq = space.quantale.len();
    let q = &space.quantale;
    let name = |i: usize| space.carrier[i].as_str();
    let elem = |a: usize| q.name(a);
    let ok = AxiomOutcome {
        holds: true,
        witness: None,
    };
    let fail = |fields: Vec<(&str, serde_json::Value)>| AxiomOutcome {
        holds: false,
        witness: Some(Witness::object(fields).0),
    };

    match ax {
        Axiom::Reflexive => {
            for x in 0..n {
                if !space.holds(x, q.unit(), x) {
                    return fail(vec![("x", serde_json::json!(name(x)))]);
                }
            }
            ok
        }
        Axiom::QuasiReflexive => {
            for x in 0..n {
                for a in 0..nq {
                    for y in 0..n {
                        if space.holds(x, a, y) && !space.holds(x, a, x) {
                            return fail(vec![
                                ("x", serde_json::json!(name(x))),
                                ("a", serde_json::json!(elem(a))),
                                ("y", serde_json::json!(name(y))),
                            ]);
                        }
                    }
                }
            }
            ok
        }
        Axiom::Transitive => {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        for a in 0..nq {
                            if !space.holds(x, a, y) {
                                continue;
                            }
                            for b in 0..nq {
                                if space.holds(y, b, z) && !space.holds(x, q.tensor(a, b), z) {
                                    return fail(vec![
                                        ("x", serde_json::json!(name(x))),
                                        ("a", serde_json::json!(elem(a))),
                                        ("y", serde_json::json!(name(y))),
                                        ("b", serde_json::json!(elem(b))),
                                        ("z", serde_json::json!(name(z))),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
            ok
        }
        Axiom::Lst => {
            for y in 0..n {
                let sy = space.sigma(y);
                for x in 0..n {
                    for z in 0..n {
                        for a in 0..nq {
                            if !space.holds(x, q.tensor(a, sy), y) {
                                continue;
                            }
                            for b in 0..nq {
                                if space.holds(y, b, z) && !space.holds(x, q.tensor(a, b), z) {
                                    return fail(vec![
                                        ("x", serde_json::json!(name(x))),
                                        ("y", serde_json::json!(name(y))),
                                        ("z", serde_json::json!(name(z))),
                                        ("a", serde_json::json!(elem(a))),
                                        ("b", serde_json::json!(elem(b))),
                                        ("sigma_y", serde_json::json!(elem(sy))),
                                    ]);
                                }
                            }
                        }
                    }
                }
            }
            ok
        }
        Axiom::St1 | Axiom::St2 | Axiom::St3 | Axiom::St4 => {
            let rel = hat(space);
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let (pxy, pyz, pxz, pyy) = (
                            rel.value(x, y),
                            rel.value(y, z),
                            rel.value(x, z),
                            rel.value(y, y),
                        );
                        let (lhs, rhs) = match ax {
                            Axiom::St1 => (q.tensor(pxy, pyz), q.tensor(pxz, pyy)),
                            Axiom::St2 => (q.tensor(pxy, q.residual(pyy, pyz)), pxz),
                            Axiom::St3 => (q.residual(pyy, q.tensor(pxy, pyz)), pxz),
                            Axiom::St4 => (
                                q.tensor(
                                    q.tensor(q.residual(pyy, pxy), pyy),
                                    q.residual(pyy, pyz),
                                ),
                                pxz,
                            ),
                            _ => unreachable!(),
                        };
                        if !q.leq(lhs, rhs) {
                            return fail(vec![
                                ("x", serde_json::json!(name(x))),
                                ("y", serde_json::json!(name(y))),
                                ("z", serde_json::json!(name(z))),
                                ("phi_xy", serde_json::json!(elem(pxy))),
                                ("phi_yz", serde_json::json!(elem(pyz))),
                                ("phi_xz", serde_json::json!(elem(pxz))),
                                ("phi_yy", serde_json::json!(elem(pyy))),
                                ("lhs", serde_json::json!(elem(lhs))),
                                ("rhs", serde_json::json!(elem(rhs))),
                            ]);
                        }
                    }
                }
            }
            ok
        }
        Axiom::SelfIndistancy => {
            for x in 0..n {
                let sx = space.sigma(x);
                for y in 0..n {
                    if space.holds(x, sx, y) && x != y {
                        return fail(vec![
                            ("x", serde_json::json!(name(x))),
                            ("sigma_x", serde_json::json!(elem(sx))),
                            ("y", serde_json::json!(name(y))),
                        ]);
                    }
                }
            }
            ok
        }
        Axiom::WeakSymmetry => {
            let sigmas: Vec<usize> = (0..n).map(|i| space.sigma(i)).collect();
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        for w in 0..n {
                            for a in 0..nq {
                                if !space.holds(x, q.tensor(a, sigmas[w]), y) {
                                    continue;
                                }
                                for b in 0..nq {
                                    let ab = q.tensor(a, b);
                                    if space.holds(x, b, z)
                                        && q.leq(ab, sigmas[y])
                                        && !space.holds(y, ab, z)
                                    {
                                        return fail(vec![
                                            ("x", serde_json::json!(name(x))),
                                            ("y", serde_json::json!(name(y))),
                                            ("z", serde_json::json!(name(z))),
                                            ("w", serde_json::json!(name(w))),
                                            ("a", serde_json::json!(elem(a))),
                                            ("b", serde_json::json!(elem(b))),
                                        ]);
                                    }
                                }
                            }
                        }
                    }
                }
            }
            ok
        }
    }
}

/// Both candidate readings of the observational identity on left strong
/// transitive spaces: the `y`-index form `hat(y,y) ⊸ hat(x,y)` and the
/// `x`-index form `hat(x,x) ⊸ hat(x,y)`. Reports which one matches the
/// left observational quasi-metric everywhere.
#[derive(Debug, Clone, Serialize)]
pub struct LstIdentityReport {
    pub y_index_holds: bool,
    pub x_index_holds: bool,
    pub y_witness: Option<serde_json::Value>,
    pub x_witness: Option<serde_json::Value>,
}

pub fn lst_observational_identity(space: &FiniteQqmSpace) -> LstIdentityReport {
    let rel = hat(space);
    let left = observational(&rel, Side::Left);
    let n = space.carrier.len();
    let q = &space.quantale;
    let mut report = LstIdentityReport {
        y_index_holds: true,
        x_index_holds: true,
        y_witness: None,
        x_witness: None,
    };
    for x in 0..n {
        for y in 0..n {
            let lobs = left.value(x, y);
            let y_form = q.residual(rel.value(y, y), rel.value(x, y));
            let x_form = q.residual(rel.value(x, x), rel.value(x, y));
            if y_form != lobs && report.y_index_holds {
                report.y_index_holds = false;
                report.y_witness = Some(serde_json::json!({
                    "x": space.carrier[x], "y": space.carrier[y],
                    "left_observational": q.name(lobs), "candidate": q.name(y_form),
                }));
            }
            if x_form != lobs && report.x_index_holds {
                report.x_index_holds = false;
                report.x_witness = Some(serde_json::json!({
                    "x": space.carrier[x], "y": space.carrier[y],
                    "left_observational": q.name(lobs), "candidate": q.name(x_form),
                }));
            }
        }
    }
    report
}

/// A random closed quasi-quasi-metric space: start from a random relation,
/// then raise diagonal entries and compose-paths (joins only) until
/// quasi-reflexivity and transitivity hold.
pub fn random_qqm_space(
    rng: &mut impl Rng,
    carrier_size: usize,
    quantale: &FiniteQuantale,
) -> FiniteQqmSpace {
    let n = carrier_size.max(1);
    let carrier: Vec<String> = (0..n).map(|i| format!("p{i}")).collect();
    let mut rel = QRelation::new_filled(carrier, quantale.clone(), 0);
    for x in 0..n {
        for y in 0..n {
            rel.set(x, y, rng.gen_range(0..quantale.len()));
        }
    }
    loop {
        let mut changed = false;
        // Quasi-reflexivity: the diagonal must dominate its row.
        for x in 0..n {
            for y in 0..n {
                let lub = quantale.join2(rel.value(x, x), rel.value(x, y));
                if lub != rel.value(x, x) {
                    rel.set(x, x, lub);
                    changed = true;
                }
            }
        }
        // Transitivity: shortest-path style joins.
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    let t = quantale.tensor(rel.value(x, y), rel.value(y, z));
                    if !quantale.leq(t, rel.value(x, z)) {
                        let lub = quantale.join2(rel.value(x, z), t);
                        rel.set(x, z, lub);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let space = predicate_of(&rel);
    debug_assert!(space.is_qqm());
    space
}

/// The three-function space from the strong-transitivity counterexample:
/// the constant-one, absolute-value, and identity functions observed at the
/// single probe point 0 with radius 2, over an integer-grid quantale with a
/// ceiling. Every number the counterexample needs stays under the ceiling,
/// so the truncation is exact for it.
pub fn ex49_space() -> FiniteQqmSpace {
    let q = FiniteQuantale::truncated_lawvere(6);
    let carrier = vec!["f".to_string(), "g".to_string(), "h".to_string()];
    let mut rel = QRelation::new_filled(carrier, q.clone(), 0);
    let v = |rel: &mut QRelation, x: usize, y: usize, val: &str| {
        let i = rel.quantale.index_of(val).unwrap();
        rel.set(x, y, i);
    };
    // Distances of f(x)=1, g(x)=|x|, h(x)=x observed at (0, 2).
    let (f, g, h) = (0, 1, 2);
    v(&mut rel, f, f, "0");
    v(&mut rel, f, g, "1");
    v(&mut rel, f, h, "3");
    v(&mut rel, g, f, "2");
    v(&mut rel, g, g, "2");
    v(&mut rel, g, h, "2");
    v(&mut rel, h, f, "2");
    v(&mut rel, h, g, "2");
    v(&mut rel, h, h, "2");
    let space = predicate_of(&rel);
    debug_assert!(space.is_qqm());
    space
}

/// On-disk format: the relation table plus the quantale spec. Compact and
/// canonical for closed predicates; raw triple lists are also accepted for
/// mining.
#[derive(Debug, Serialize, Deserialize)]
struct SpaceFile {
    carrier: Vec<String>,
    quantale: FiniteQuantaleSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    relation: Option<Vec<(String, String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    raw_triples: Option<Vec<(String, String, String)>>,
}

impl SpaceFile {
    fn from_space(space: &FiniteQqmSpace) -> Self {
        let rel = hat(space);
        let n = space.carrier.len();
        let mut relation = Vec::with_capacity(n * n);
        for x in 0..n {
            for y in 0..n {
                relation.push((
                    space.carrier[x].clone(),
                    space.carrier[y].clone(),
                    space.quantale.name(rel.value(x, y)).to_string(),
                ));
            }
        }
        SpaceFile {
            carrier: space.carrier.to_vec(),
            quantale: space.quantale.to_spec(),
            relation: Some(relation),
            raw_triples: None,
        }
    }

    fn into_space(self) -> Result<FiniteQqmSpace, SpaceError> {
        let quantale = FiniteQuantale::from_spec(&self.quantale)?;
        let carrier = self.carrier;
        let label = |s: &str| {
            carrier
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| SpaceError::UnknownLabel(s.to_string()))
        };
        let elem = |s: &str| {
            quantale
                .index_of(s)
                .ok_or_else(|| SpaceError::UnknownElement(s.to_string()))
        };
        if let Some(relation) = self.relation {
            let mut rel =
                QRelation::new_filled(carrier.clone(), quantale.clone(), quantale.bottom());
            for (x, y, v) in &relation {
                let (xi, yi, vi) = (label(x)?, label(y)?, elem(v)?);
                rel.set(xi, yi, vi);
            }
            Ok(predicate_of(&rel))
        } else if let Some(raw) = self.raw_triples {
            let mut triples = Vec::with_capacity(raw.len());
            for (x, a, y) in &raw {
                triples.push((label(x)?, elem(a)?, label(y)?));
            }
            Ok(FiniteQqmSpace::raw(carrier, quantale, triples))
        } else {
            Err(SpaceError::Format(
                "space file needs `relation` or `raw_triples`".into(),
            ))
        }
    }
}
