use std::fmt;
use std::str::FromStr;

use super::distribution::{check_simplex, Distribution};
use super::label::{Label, Support};
use crate::error::{AuditError, Result};
use crate::scalar::{approx_eq, Scalar, Total, FLOAT_TOL};

/// The four random variables of the construct/observed/prediction framework.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variable {
    Z,
    Yc,
    Yo,
    Yp,
}

impl Variable {
    pub const ALL: [Variable; 4] = [Variable::Z, Variable::Yc, Variable::Yo, Variable::Yp];

    fn slot(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::Z => "Z",
            Variable::Yc => "Yc",
            Variable::Yo => "Yo",
            Variable::Yp => "Yp",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variable {
    type Err = AuditError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "z" => Ok(Variable::Z),
            "yc" | "construct" => Ok(Variable::Yc),
            "yo" | "observed" => Ok(Variable::Yo),
            "yp" | "predicted" | "prediction" => Ok(Variable::Yp),
            _ => Err(AuditError::Parse(format!("unknown variable `{s}`"))),
        }
    }
}

/// Declared supports of a joint table. `construct: None` marks a table
/// without a construct column (construct-dependent operations refuse it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Supports {
    pub construct: Option<Support>,
    pub observed: Support,
    pub predicted: Support,
}

impl Supports {
    pub fn new(construct: Option<Support>, observed: Support, predicted: Support) -> Self {
        Supports { construct, observed, predicted }
    }
}

/// Full assignment `(z, yc, yo, yp)`; `yc` is `None` for construct-free tables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Assignment {
    pub z: u8,
    pub yc: Option<Label>,
    pub yo: Label,
    pub yp: Label,
}

impl Assignment {
    pub fn new(z: u8, yc: Option<Label>, yo: Label, yp: Label) -> Self {
        Assignment { z, yc, yo, yp }
    }
}

/// Exact (or float) probability table over `(Z, Yc, Yo, Yp)` with `Z ∈ {0, 1}`.
///
/// Stored densely in `(z, yc, yo, yp)` row-major order; absent cells are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct JointDistribution<T> {
    yc: Support,
    yo: Support,
    yp: Support,
    has_construct: bool,
    table: Vec<T>,
}

fn placeholder_support() -> Support {
    Support::new([Label::text("*")]).expect("single label")
}

impl<T: Scalar> JointDistribution<T> {
    /// Validated table from sparse cells. Unlisted assignments have probability zero;
    /// repeated assignments are rejected.
    pub fn from_cells(supports: Supports, cells: impl IntoIterator<Item = (Assignment, T)>) -> Result<Self> {
        let mut joint = Self::zeros(supports);
        let mut seen = vec![false; joint.table.len()];
        for (a, p) in cells {
            let idx = joint.locate(&a)?;
            if std::mem::replace(&mut seen[idx], true) {
                return Err(AuditError::InvalidParameter(format!(
                    "assignment (z={}, yc={}, yo={}, yp={}) listed twice",
                    a.z,
                    a.yc.map(|l| l.to_string()).unwrap_or_default(),
                    a.yo,
                    a.yp
                )));
            }
            joint.table[idx] = p;
        }
        joint.validate()?;
        Ok(joint)
    }

    /// Builds from a dense table in `(z, yc, yo, yp)` order.
    pub fn from_dense(supports: Supports, table: Vec<T>) -> Result<Self> {
        let mut joint = Self::zeros(supports);
        if table.len() != joint.table.len() {
            return Err(AuditError::InvalidParameter(format!(
                "dense table has {} cells, expected {}",
                table.len(),
                joint.table.len()
            )));
        }
        joint.table = table;
        joint.validate()?;
        Ok(joint)
    }

    /// Like [`JointDistribution::from_dense`] for tables already known to be
    /// valid; only debug builds check.
    pub(crate) fn from_dense_trusted(supports: Supports, table: Vec<T>) -> Self {
        let mut joint = Self::zeros(supports);
        debug_assert_eq!(table.len(), joint.table.len());
        joint.table = table;
        debug_assert!(joint.validate().is_ok());
        joint
    }

    /// Dense table from a cell function `f(z, yc_idx, yo_idx, yp_idx)`.
    pub fn from_fn(supports: Supports, f: impl Fn(usize, usize, usize, usize) -> T) -> Result<Self> {
        let mut joint = Self::zeros(supports);
        let (nc, no, np) = joint.dims();
        for z in 0..2 {
            for c in 0..nc {
                for o in 0..no {
                    for p in 0..np {
                        let i = joint.index(z, c, o, p);
                        joint.table[i] = f(z, c, o, p);
                    }
                }
            }
        }
        joint.validate()?;
        Ok(joint)
    }

    fn zeros(supports: Supports) -> Self {
        let has_construct = supports.construct.is_some();
        let yc = supports.construct.unwrap_or_else(placeholder_support);
        let n = 2 * yc.len() * supports.observed.len() * supports.predicted.len();
        JointDistribution {
            yc,
            yo: supports.observed,
            yp: supports.predicted,
            has_construct,
            table: vec![T::zero(); n],
        }
    }

    fn validate(&self) -> Result<()> {
        let labels: Vec<Label> = (0..self.table.len()).map(|i| Label::int(i as i64)).collect();
        check_simplex(&labels, &self.table).map_err(|e| match e {
            AuditError::NegativeProbability { cell, value } => {
                let i: usize = cell.parse().unwrap_or(0);
                AuditError::NegativeProbability { cell: self.describe(i), value }
            }
            other => other,
        })?;
        for z in 0..2u8 {
            if self.z_mass(z) <= T::zero() {
                return Err(AuditError::EmptyGroup(z));
            }
        }
        Ok(())
    }

    fn describe(&self, i: usize) -> String {
        let [z, c, o, p] = self.coords(i);
        format!("(z={z}, yc={}, yo={}, yp={})", self.yc.get(c), self.yo.get(o), self.yp.get(p))
    }

    fn locate(&self, a: &Assignment) -> Result<usize> {
        let unknown =
            |variable: Variable, label: String| AuditError::UnknownLabel { variable: variable.to_string(), label };
        if a.z > 1 {
            return Err(unknown(Variable::Z, a.z.to_string()));
        }
        let c = match (&a.yc, self.has_construct) {
            (Some(l), true) => self.yc.index_of(l).ok_or_else(|| unknown(Variable::Yc, l.to_string()))?,
            (None, false) => 0,
            (Some(l), false) => return Err(unknown(Variable::Yc, l.to_string())),
            (None, true) => return Err(unknown(Variable::Yc, "<missing>".into())),
        };
        let o = self.yo.index_of(&a.yo).ok_or_else(|| unknown(Variable::Yo, a.yo.to_string()))?;
        let p = self.yp.index_of(&a.yp).ok_or_else(|| unknown(Variable::Yp, a.yp.to_string()))?;
        Ok(self.index(a.z as usize, c, o, p))
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        (self.yc.len(), self.yo.len(), self.yp.len())
    }

    #[inline]
    pub fn index(&self, z: usize, c: usize, o: usize, p: usize) -> usize {
        let (nc, no, np) = self.dims();
        ((z * nc + c) * no + o) * np + p
    }

    #[inline]
    fn coords(&self, i: usize) -> [usize; 4] {
        let (nc, no, np) = self.dims();
        let p = i % np;
        let o = (i / np) % no;
        let c = (i / (np * no)) % nc;
        let z = i / (np * no * nc);
        [z, c, o, p]
    }

    /// Probability of cell `(z, yc_idx, yo_idx, yp_idx)`.
    pub fn at(&self, z: usize, c: usize, o: usize, p: usize) -> &T {
        &self.table[self.index(z, c, o, p)]
    }

    pub fn table(&self) -> &[T] {
        &self.table
    }

    pub fn has_construct(&self) -> bool {
        self.has_construct
    }

    pub fn supports(&self) -> Supports {
        Supports {
            construct: self.has_construct.then(|| self.yc.clone()),
            observed: self.yo.clone(),
            predicted: self.yp.clone(),
        }
    }

    /// Support of `var`; the placeholder single-label support for a missing construct.
    pub fn support(&self, var: Variable) -> Support {
        match var {
            Variable::Z => Support::binary(),
            Variable::Yc => self.yc.clone(),
            Variable::Yo => self.yo.clone(),
            Variable::Yp => self.yp.clone(),
        }
    }

    fn support_ref(&self, var: Variable) -> Option<&Support> {
        match var {
            Variable::Z => None,
            Variable::Yc => Some(&self.yc),
            Variable::Yo => Some(&self.yo),
            Variable::Yp => Some(&self.yp),
        }
    }

    fn var_len(&self, var: Variable) -> usize {
        self.support_ref(var).map_or(2, Support::len)
    }

    pub fn require_construct(&self) -> Result<()> {
        if self.has_construct {
            Ok(())
        } else {
            Err(AuditError::ConstructUnavailable)
        }
    }

    /// Iterates `([z, yc, yo, yp] indices, probability)`.
    pub fn cells(&self) -> impl Iterator<Item = ([usize; 4], &T)> + '_ {
        self.table.iter().enumerate().map(move |(i, p)| (self.coords(i), p))
    }

    /// Non-zero cells as labelled assignments.
    pub fn assignments(&self) -> impl Iterator<Item = (Assignment, &T)> + '_ {
        self.cells().filter(|(_, p)| !p.is_zero()).map(move |([z, c, o, p], prob)| {
            let yc = self.has_construct.then(|| self.yc.get(c).clone());
            (Assignment::new(z as u8, yc, self.yo.get(o).clone(), self.yp.get(p).clone()), prob)
        })
    }

    pub fn z_mass(&self, z: u8) -> T {
        let block = self.table.len() / 2;
        let start = z as usize * block;
        self.table[start..start + block].iter().cloned().total()
    }

    /// Total mass of cells where every `(variable, index)` constraint holds.
    pub fn mass_where_idx(&self, given: &[(Variable, usize)]) -> T {
        self.cells().filter(|(k, _)| given.iter().all(|(v, i)| k[v.slot()] == *i)).map(|(_, p)| p.clone()).total()
    }

    /// Unnormalised law of `target` restricted to cells matching `given`.
    fn masses_idx(&self, target: Variable, given: &[(Variable, usize)]) -> Vec<T> {
        let mut out = vec![T::zero(); self.var_len(target)];
        for (k, p) in self.cells() {
            if given.iter().all(|(v, i)| k[v.slot()] == *i) {
                let slot = &mut out[k[target.slot()]];
                if !p.is_zero() {
                    *slot += p;
                }
            }
        }
        out
    }

    /// Marginal law of `var`.
    pub fn marginal(&self, var: Variable) -> Distribution<T> {
        Distribution::from_parts(self.support(var), self.masses_idx(var, &[]))
    }

    /// Conditional law of `target` given index constraints.
    pub fn condition_idx(&self, target: Variable, given: &[(Variable, usize)]) -> Result<Distribution<T>> {
        let masses = self.masses_idx(target, given);
        let total: T = masses.iter().cloned().total();
        if total <= T::zero() {
            let desc: Vec<String> = given
                .iter()
                .map(|(v, i)| match self.support_ref(*v) {
                    Some(s) => format!("{v}={}", s.get(*i)),
                    None => format!("{v}={i}"),
                })
                .collect();
            return Err(AuditError::ZeroMassCondition(desc.join(", ")));
        }
        let probs = masses.into_iter().map(|m| m / total.clone()).collect();
        Ok(Distribution::from_parts(self.support(target), probs))
    }

    /// Conditional law of `target` given labelled constraints, e.g. `Yp | Z=0`.
    pub fn condition(&self, target: Variable, given: &[(Variable, Label)]) -> Result<Distribution<T>> {
        let idx = given.iter().map(|(v, l)| self.label_index(*v, l).map(|i| (*v, i))).collect::<Result<Vec<_>>>()?;
        self.condition_idx(target, &idx)
    }

    pub fn label_index(&self, var: Variable, label: &Label) -> Result<usize> {
        let found = match self.support_ref(var) {
            Some(s) => s.index_of(label),
            None => (0..2).find(|z| label.is_int(*z as i64)),
        };
        found.ok_or_else(|| AuditError::UnknownLabel { variable: var.to_string(), label: label.to_string() })
    }

    /// `var | Z = z`. Always defined since both groups carry mass.
    pub fn group_law(&self, var: Variable, z: u8) -> Distribution<T> {
        self.condition_idx(var, &[(Variable::Z, z as usize)]).expect("group masses are positive by construction")
    }

    /// Joint law of `(var_a, var_b)` within group `z`, as a matrix.
    pub fn pair_law(&self, a: Variable, b: Variable, z: u8) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.var_len(b)]; self.var_len(a)];
        let zm = self.z_mass(z);
        for (k, p) in self.cells() {
            if k[0] == z as usize {
                let slot = &mut out[k[a.slot()]][k[b.slot()]];
                *slot += &(p.clone() / zm.clone());
            }
        }
        out
    }

    /// Relabels `var` through `f`, merging cells whose new labels coincide.
    pub fn relabel(&self, var: Variable, f: impl Fn(&Label) -> Label) -> Result<Self> {
        if var == Variable::Z {
            return Err(AuditError::InvalidParameter("Z cannot be relabelled".into()));
        }
        if var == Variable::Yc {
            self.require_construct()?;
        }
        let old = self.support(var);
        let mapped: Vec<Label> = old.iter().map(&f).collect();
        let new_support = Support::collect(mapped.iter().cloned())?;
        let target: Vec<usize> = mapped.iter().map(|l| new_support.index_of(l).unwrap()).collect();
        let mut supports = self.supports();
        match var {
            Variable::Yc => supports.construct = Some(new_support),
            Variable::Yo => supports.observed = new_support,
            Variable::Yp => supports.predicted = new_support,
            Variable::Z => unreachable!(),
        }
        let mut out = Self::zeros(supports);
        for (mut k, p) in self.cells() {
            k[var.slot()] = target[k[var.slot()]];
            let i = out.index(k[0], k[1], k[2], k[3]);
            out.table[i] = out.table[i].clone() + p.clone();
        }
        Ok(out)
    }

    /// Exchanges the roles of the two groups.
    pub fn swap_groups(&self) -> Self {
        let half = self.table.len() / 2;
        let mut table = self.table[half..].to_vec();
        table.extend_from_slice(&self.table[..half]);
        JointDistribution { table, ..self.clone() }
    }

    /// Replaces the construct column: `Pr[yc, yo, yp, z] = f(z, yo, yp)[yc] · Pr[yo, yp, z]`,
    /// where each `f(...)` is a law over `construct`.
    pub fn with_construct(&self, construct: Support, law: impl Fn(usize, usize, usize) -> Vec<T>) -> Result<Self> {
        let base = self.without_construct_masses();
        let mut supports = self.supports();
        supports.construct = Some(construct);
        let mut out = Self::zeros(supports);
        let (nc, no, np) = out.dims();
        for z in 0..2 {
            for o in 0..no {
                for p in 0..np {
                    let m = &base[(z * no + o) * np + p];
                    if m.is_zero() {
                        continue;
                    }
                    let row = law(z, o, p);
                    debug_assert_eq!(row.len(), nc);
                    for (c, w) in row.into_iter().enumerate() {
                        let i = out.index(z, c, o, p);
                        out.table[i] = w * m.clone();
                    }
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Drops the construct column.
    pub fn forget_construct(&self) -> Self {
        let mut supports = self.supports();
        supports.construct = None;
        let mut out = Self::zeros(supports);
        out.table = self.without_construct_masses();
        out
    }

    /// Masses over `(z, yo, yp)` in row-major order.
    fn without_construct_masses(&self) -> Vec<T> {
        let (_, no, np) = self.dims();
        let mut out = vec![T::zero(); 2 * no * np];
        for ([z, _, o, p], m) in self.cells() {
            let slot = &mut out[(z * no + o) * np + p];
            *slot += m;
        }
        out
    }

    /// Converts every probability to another arithmetic backend.
    pub fn convert<U: Scalar>(&self) -> JointDistribution<U> {
        JointDistribution {
            yc: self.yc.clone(),
            yo: self.yo.clone(),
            yp: self.yp.clone(),
            has_construct: self.has_construct,
            table: self.table.iter().map(|p| U::from_ratio(&p.to_ratio())).collect(),
        }
    }

    /// Cellwise equality up to float slack.
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.supports() == other.supports()
            && self.table.iter().zip(&other.table).all(|(a, b)| approx_eq(a, b, FLOAT_TOL))
    }
}
