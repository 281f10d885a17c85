//! Finite quantales given by explicit tables: a named element set, an order
//! relation, a tensor table, and a distinguished unit. Everything a quantale
//! must satisfy is checkable here by enumeration, so these are the ground
//! truth for brute-force work.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum FiniteQuantaleError {
    #[error("duplicate element name `{0}`")]
    DuplicateElement(String),
    #[error("unknown element name `{0}`")]
    UnknownElement(String),
    #[error("order is not reflexive at `{0}`")]
    NotReflexive(String),
    #[error("order is not antisymmetric between `{0}` and `{1}`")]
    NotAntisymmetric(String, String),
    #[error("order is not transitive via `{0}` <= `{1}` <= `{2}`")]
    NotTransitive(String, String, String),
    #[error("elements `{0}` and `{1}` have no join")]
    MissingJoin(String, String),
    #[error("elements `{0}` and `{1}` have no meet")]
    MissingMeet(String, String),
    #[error("no bottom element")]
    MissingBottom,
    #[error("tensor is not commutative at ({0}, {1})")]
    TensorNotCommutative(String, String),
    #[error("tensor is not associative at ({0}, {1}, {2})")]
    TensorNotAssociative(String, String, String),
    #[error("`{0}` is not a tensor unit: {1} * unit = {2}")]
    BadUnit(String, String, String),
    #[error("unit `{0}` is not the top element: `{1}` is not below it")]
    NotIntegral(String, String),
    #[error("tensor does not distribute over the join of ({1}, {2}) at {0}")]
    TensorNotJoinContinuous(String, String, String),
    #[error("tensor does not preserve bottom at `{0}`")]
    TensorNotBottomPreserving(String),
}

/// On-disk form: order given as a list of `[below, above]` pairs (reflexive
/// pairs may be omitted), tensor as a row-major table over element order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FiniteQuantaleSpec {
    pub elements: Vec<String>,
    pub order: Vec<(String, String)>,
    pub tensor: Vec<Vec<String>>,
    pub unit: String,
}

/// A validated finite quantale. Elements are referred to by index; meets and
/// joins of all pairs are precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteQuantale {
    names: Vec<String>,
    leq: Vec<Vec<bool>>,
    tensor: Vec<Vec<usize>>,
    meet: Vec<Vec<usize>>,
    join: Vec<Vec<usize>>,
    unit: usize,
    bottom: usize,
}

impl FiniteQuantale {
    pub fn from_spec(spec: &FiniteQuantaleSpec) -> Result<Self, FiniteQuantaleError> {
        let n = spec.elements.len();
        let index_of = |name: &str| -> Result<usize, FiniteQuantaleError> {
            spec.elements
                .iter()
                .position(|e| e == name)
                .ok_or_else(|| FiniteQuantaleError::UnknownElement(name.to_string()))
        };
        for (i, e) in spec.elements.iter().enumerate() {
            if spec.elements[..i].contains(e) {
                return Err(FiniteQuantaleError::DuplicateElement(e.clone()));
            }
        }

        let mut leq = vec![vec![false; n]; n];
        for i in 0..n {
            leq[i][i] = true;
        }
        for (lo, hi) in &spec.order {
            leq[index_of(lo)?][index_of(hi)?] = true;
        }
        // Transitive closure so that specs may list only generating pairs.
        loop {
            let mut changed = false;
            for a in 0..n {
                for b in 0..n {
                    if leq[a][b] {
                        for c in 0..n {
                            if leq[b][c] && !leq[a][c] {
                                leq[a][c] = true;
                                changed = true;
                            }
                        }
                    }
                }
            }
            if !changed {
                break;
            }
        }

        let mut tensor = vec![vec![0usize; n]; n];
        for (i, row) in spec.tensor.iter().enumerate() {
            for (j, name) in row.iter().enumerate() {
                tensor[i][j] = index_of(name)?;
            }
        }
        let unit = index_of(&spec.unit)?;
        Self::build(spec.elements.clone(), leq, tensor, unit)
    }

    /// Builds and fully validates: partial order, lattice completeness,
    /// commutative monoid, integrality, and join-continuity of the tensor.
    pub fn build(
        names: Vec<String>,
        leq: Vec<Vec<bool>>,
        tensor: Vec<Vec<usize>>,
        unit: usize,
    ) -> Result<Self, FiniteQuantaleError> {
        let n = names.len();
        let name = |i: usize| names[i].clone();

        for a in 0..n {
            if !leq[a][a] {
                return Err(FiniteQuantaleError::NotReflexive(name(a)));
            }
            for b in 0..n {
                if a != b && leq[a][b] && leq[b][a] {
                    return Err(FiniteQuantaleError::NotAntisymmetric(name(a), name(b)));
                }
                for c in 0..n {
                    if leq[a][b] && leq[b][c] && !leq[a][c] {
                        return Err(FiniteQuantaleError::NotTransitive(name(a), name(b), name(c)));
                    }
                }
            }
        }

        let lub = |a: usize, b: usize| -> Option<usize> {
            let uppers: Vec<usize> = (0..n).filter(|&u| leq[a][u] && leq[b][u]).collect();
            uppers
                .iter()
                .copied()
                .find(|&u| uppers.iter().all(|&v| leq[u][v]))
        };
        let glb = |a: usize, b: usize| -> Option<usize> {
            let lowers: Vec<usize> = (0..n).filter(|&l| leq[l][a] && leq[l][b]).collect();
            lowers
                .iter()
                .copied()
                .find(|&l| lowers.iter().all(|&m| leq[m][l]))
        };

        let mut join = vec![vec![0usize; n]; n];
        let mut meet = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                join[a][b] =
                    lub(a, b).ok_or_else(|| FiniteQuantaleError::MissingJoin(name(a), name(b)))?;
                meet[a][b] =
                    glb(a, b).ok_or_else(|| FiniteQuantaleError::MissingMeet(name(a), name(b)))?;
            }
        }
        let bottom = (0..n)
            .find(|&x| (0..n).all(|y| leq[x][y]))
            .ok_or(FiniteQuantaleError::MissingBottom)?;

        for a in 0..n {
            for b in 0..n {
                if tensor[a][b] != tensor[b][a] {
                    return Err(FiniteQuantaleError::TensorNotCommutative(name(a), name(b)));
                }
                for c in 0..n {
                    if tensor[tensor[a][b]][c] != tensor[a][tensor[b][c]] {
                        return Err(FiniteQuantaleError::TensorNotAssociative(
                            name(a),
                            name(b),
                            name(c),
                        ));
                    }
                }
            }
            if tensor[a][unit] != a {
                return Err(FiniteQuantaleError::BadUnit(
                    name(unit),
                    name(a),
                    name(tensor[a][unit]),
                ));
            }
            if !leq[a][unit] {
                return Err(FiniteQuantaleError::NotIntegral(name(unit), name(a)));
            }
        }
        for x in 0..n {
            if tensor[x][bottom] != bottom {
                return Err(FiniteQuantaleError::TensorNotBottomPreserving(name(x)));
            }
            for a in 0..n {
                for b in 0..n {
                    if tensor[x][join[a][b]] != join[tensor[x][a]][tensor[x][b]] {
                        return Err(FiniteQuantaleError::TensorNotJoinContinuous(
                            name(x),
                            name(a),
                            name(b),
                        ));
                    }
                }
            }
        }

        Ok(FiniteQuantale {
            names,
            leq,
            tensor,
            meet,
            join,
            unit,
            bottom,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, String> {
        let spec: FiniteQuantaleSpec = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::from_spec(&spec).map_err(|e| e.to_string())
    }

    /// For constructions whose laws hold pointwise by construction (the
    /// workbench exponential); skips the O(n^3) validation pass. Tests
    /// cross-validate small instances against [`FiniteQuantale::build`].
    pub(crate) fn from_parts_unchecked(
        names: Vec<String>,
        leq: Vec<Vec<bool>>,
        tensor: Vec<Vec<usize>>,
        meet: Vec<Vec<usize>>,
        join: Vec<Vec<usize>>,
        unit: usize,
        bottom: usize,
    ) -> Self {
        FiniteQuantale {
            names,
            leq,
            tensor,
            meet,
            join,
            unit,
            bottom,
        }
    }

    pub fn to_spec(&self) -> FiniteQuantaleSpec {
        let n = self.len();
        let mut order = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && self.leq[a][b] {
                    order.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        FiniteQuantaleSpec {
            elements: self.names.clone(),
            order,
            tensor: self
                .tensor
                .iter()
                .map(|row| row.iter().map(|&i| self.names[i].clone()).collect())
                .collect(),
            unit: self.names[self.unit].clone(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn unit(&self) -> usize {
        self.unit
    }

    pub fn bottom(&self) -> usize {
        self.bottom
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn tensor(&self, a: usize, b: usize) -> usize {
        self.tensor[a][b]
    }

    pub fn meet2(&self, a: usize, b: usize) -> usize {
        self.meet[a][b]
    }

    pub fn join2(&self, a: usize, b: usize) -> usize {
        self.join[a][b]
    }

    /// Meet of a family; the empty family gives the unit (= top).
    pub fn meet_family(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items.into_iter().fold(self.unit, |acc, x| self.meet2(acc, x))
    }

    /// Join of a family; the empty family gives bottom.
    pub fn join_family(&self, items: impl IntoIterator<Item = usize>) -> usize {
        items
            .into_iter()
            .fold(self.bottom, |acc, x| self.join2(acc, x))
    }

    /// `a ⊸ b`: the largest `z` with `a ⊗ z ⊑ b`, computed by scan.
    pub fn residual(&self, a: usize, b: usize) -> usize {
        self.join_family((0..self.len()).filter(|&z| self.leq[self.tensor[a][z]][b]))
    }

    /// The lifted quantale: a fresh bottom `empty` strictly below an
    /// isomorphic copy of every element, with an absorbing tensor.
    pub fn lifted(&self) -> FiniteQuantale {
        let n = self.len();
        let mut names = vec!["empty".to_string()];
        names.extend(self.names.iter().map(|s| format!("some({s})")));
        let mut leq = vec![vec![false; n + 1]; n + 1];
        for i in 0..=n {
            leq[0][i] = true;
            leq[i][i] = true;
        }
        for a in 0..n {
            for b in 0..n {
                leq[a + 1][b + 1] = self.leq[a][b];
            }
        }
        let mut tensor = vec![vec![0usize; n + 1]; n + 1];
        for a in 0..n {
            for b in 0..n {
                tensor[a + 1][b + 1] = self.tensor[a][b] + 1;
            }
        }
        FiniteQuantale::build(names, leq, tensor, self.unit + 1)
            .expect("lifting preserves the quantale laws")
    }

    /// Componentwise product quantale; element names are `l|r`.
    pub fn product(&self, other: &FiniteQuantale) -> FiniteQuantale {
        let (n, m) = (self.len(), other.len());
        let idx = |a: usize, b: usize| a * m + b;
        let mut names = Vec::with_capacity(n * m);
        for a in 0..n {
            for b in 0..m {
                names.push(format!("{}|{}", self.names[a], other.names[b]));
            }
        }
        let mut leq = vec![vec![false; n * m]; n * m];
        let mut tensor = vec![vec![0usize; n * m]; n * m];
        for a in 0..n {
            for b in 0..m {
                for c in 0..n {
                    for d in 0..m {
                        leq[idx(a, b)][idx(c, d)] = self.leq[a][c] && other.leq[b][d];
                        tensor[idx(a, b)][idx(c, d)] = idx(self.tensor[a][c], other.tensor[b][d]);
                    }
                }
            }
        }
        FiniteQuantale::build(names, leq, tensor, idx(self.unit, other.unit))
            .expect("products preserve the quantale laws")
    }

    /// The Boolean quantale `{0, 1}` with conjunction; the smallest example.
    pub fn boolean() -> FiniteQuantale {
        FiniteQuantale::build(
            vec!["0".into(), "1".into()],
            vec![vec![true, true], vec![false, true]],
            vec![vec![0, 0], vec![0, 1]],
            1,
        )
        .expect("boolean quantale is valid")
    }

    /// Truncation of the extended nonnegative reals to an integer grid
    /// `{0, 1, .., ceil}` plus a ceiling element standing for everything
    /// >= ceil, with reversed numeric order and saturating addition. The
    /// grid is closed under tensor, so finite work can replay real-valued
    /// counterexamples whose arithmetic stays under the ceiling.
    pub fn truncated_lawvere(ceil: u32) -> FiniteQuantale {
        let n = (ceil as usize) + 2; // 0..=ceil plus the ceiling "inf" element
        let value = |i: usize| i as u32; // index i holds numeric value i; last = inf
        let names: Vec<String> = (0..n)
            .map(|i| {
                if i + 1 == n {
                    "inf".to_string()
                } else {
                    format!("{}", value(i))
                }
            })
            .collect();
        let mut leq = vec![vec![false; n]; n];
        for a in 0..n {
            for b in 0..n {
                // Reversed order: numerically bigger is lower; "inf" lowest.
                leq[a][b] = a >= b;
            }
        }
        let mut tensor = vec![vec![0usize; n]; n];
        for a in 0..n {
            for b in 0..n {
                tensor[a][b] = (a + b).min(n - 1);
            }
        }
        FiniteQuantale::build(names, leq, tensor, 0).expect("truncated Lawvere grid is valid")
    }
}
