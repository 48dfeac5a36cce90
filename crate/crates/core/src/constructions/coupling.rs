use serde::ser::{SerializeStruct, Serializer};
use serde::Serialize;

use crate::probability::{align, Distribution, Support};
use crate::scalar::{self, Scalar, Total};

/// Joint law of `(U, V)` with prescribed marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling<T> {
    pub support: Support,
    /// `joint[u][v] = Pr[U = u, V = v]`.
    pub joint: Vec<Vec<T>>,
}

impl<T: Scalar> Coupling<T> {
    /// `Pr[U = V]`.
    pub fn agreement(&self) -> T {
        (0..self.support.len()).map(|i| self.joint[i][i].clone()).total()
    }

    pub fn left_marginal(&self) -> Vec<T> {
        self.joint.iter().map(|row| row.iter().cloned().total()).collect()
    }

    pub fn right_marginal(&self) -> Vec<T> {
        (0..self.support.len()).map(|j| self.joint.iter().map(|row| row[j].clone()).total()).collect()
    }
}

impl<T: Scalar> Serialize for Coupling<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cells: Vec<serde_json::Value> = self
            .joint
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, p)| (i, j, p)))
            .filter(|(_, _, p)| !p.is_zero())
            .map(|(i, j, p)| {
                serde_json::json!({
                    "u": self.support.get(i),
                    "v": self.support.get(j),
                    "p": scalar::serialize(p, serde_json::value::Serializer).expect("scalar to json"),
                })
            })
            .collect();
        let mut st = s.serialize_struct("Coupling", 2)?;
        st.serialize_field("support", self.support.labels())?;
        st.serialize_field("cells", &cells)?;
        st.end()
    }
}

/// Coupling with `Pr[U = V] = Σ min(p, q)`.
///
/// The diagonal carries `min(p(y), q(y))`; leftover mass of `p` is matched to
/// leftover demand of `q` greedily in canonical label order.
pub fn maximal_coupling<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> Coupling<T> {
    let (support, a, b) = align(p, q);
    let n = support.len();
    let mut joint = vec![vec![T::zero(); n]; n];
    let mut surplus = Vec::with_capacity(n);
    let mut deficit = Vec::with_capacity(n);
    for i in 0..n {
        let m = if a[i] <= b[i] { a[i].clone() } else { b[i].clone() };
        joint[i][i] = m.clone();
        surplus.push(a[i].clone() - m.clone());
        deficit.push(b[i].clone() - m);
    }
    let (mut i, mut j) = (0, 0);
    while i < n && j < n {
        if surplus[i].is_zero() {
            i += 1;
            continue;
        }
        if deficit[j].is_zero() {
            j += 1;
            continue;
        }
        let x = if surplus[i] <= deficit[j] { surplus[i].clone() } else { deficit[j].clone() };
        joint[i][j] = joint[i][j].clone() + x.clone();
        surplus[i] = surplus[i].clone() - x.clone();
        deficit[j] = deficit[j].clone() - x;
    }
    Coupling { support, joint }
}
