use super::distribution::{check_simplex, Distribution};
use super::joint::{JointDistribution, Supports, Variable};
use super::label::{Label, Support};
use crate::error::{AuditError, Result};
use crate::scalar::Scalar;

/// A stochastic classifier: for each `(input, z)` a law over the prediction support.
///
/// The input is the observed label by default. Constructions that model a
/// classifier with access to the construct use [`Variable::Yc`] instead.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelKernel<T> {
    input: Variable,
    input_support: Support,
    output: Support,
    rows: Vec<Option<Vec<T>>>,
}

impl<T: Scalar> ModelKernel<T> {
    /// Rows are indexed `[z][input label index]`; `None` leaves a row undefined.
    pub fn new(
        input: Variable,
        input_support: Support,
        output: Support,
        rows: [Vec<Option<Vec<T>>>; 2],
    ) -> Result<Self> {
        if !matches!(input, Variable::Yo | Variable::Yc) {
            return Err(AuditError::InvalidParameter(format!("kernel input must be Yo or Yc, got {input}")));
        }
        let [r0, r1] = rows;
        if r0.len() != input_support.len() || r1.len() != input_support.len() {
            return Err(AuditError::InvalidParameter("kernel row count mismatch".into()));
        }
        let rows: Vec<Option<Vec<T>>> = r0.into_iter().chain(r1).collect();
        for (i, row) in rows.iter().enumerate() {
            if let Some(row) = row {
                let context =
                    format!("({input}={}, Z={})", input_support.get(i % input_support.len()), i / input_support.len());
                if row.len() != output.len() {
                    return Err(AuditError::InvalidKernelRow { context, reason: "wrong width".into() });
                }
                check_simplex(output.labels(), row)
                    .map_err(|e| AuditError::InvalidKernelRow { context, reason: e.to_string() })?;
            }
        }
        Ok(ModelKernel { input, input_support, output, rows })
    }

    /// Every row defined by `f(z, input_index)`.
    pub fn from_fn(
        input: Variable,
        input_support: Support,
        output: Support,
        f: impl Fn(usize, usize) -> Vec<T>,
    ) -> Result<Self> {
        let n = input_support.len();
        let rows = [0, 1].map(|z| (0..n).map(|x| Some(f(z, x))).collect());
        ModelKernel::new(input, input_support, output, rows)
    }

    /// Ignores its inputs and always draws from `law`.
    pub fn constant(input_support: Support, law: &Distribution<T>) -> Result<Self> {
        let row = law.probs().to_vec();
        ModelKernel::from_fn(Variable::Yo, input_support, law.support().clone(), |_, _| row.clone())
    }

    /// `Yp := input`, predicting in the input's own label space.
    pub fn identity(input: Variable, input_support: Support) -> Result<Self> {
        let n = input_support.len();
        ModelKernel::from_fn(input, input_support.clone(), input_support, |_, x| {
            (0..n).map(|j| if j == x { T::one() } else { T::zero() }).collect()
        })
    }

    /// `Yp := Z`.
    pub fn group_indicator(input_support: Support) -> Result<Self> {
        ModelKernel::from_fn(Variable::Yo, input_support, Support::binary(), |z, _| {
            (0..2).map(|j| if j == z { T::one() } else { T::zero() }).collect()
        })
    }

    pub fn input(&self) -> Variable {
        self.input
    }

    pub fn input_support(&self) -> &Support {
        &self.input_support
    }

    pub fn output(&self) -> &Support {
        &self.output
    }

    pub fn row(&self, z: usize, x: usize) -> Option<&[T]> {
        self.rows[z * self.input_support.len() + x].as_deref()
    }

    pub fn row_law(&self, z: usize, x: usize) -> Option<Distribution<T>> {
        self.row(z, x).map(|r| Distribution::from_parts(self.output.clone(), r.to_vec()))
    }
}

/// Applies `kernel` to `base`, replacing its prediction column.
///
/// The base's own `Yp` column is marginalised out first, so the output has
/// `Yp ⟂ (everything else) | (kernel input, Z)` and leaves the
/// `(Yc, Yo, Z)` marginal untouched.
pub fn apply_model<T: Scalar>(base: &JointDistribution<T>, kernel: &ModelKernel<T>) -> Result<JointDistribution<T>> {
    if kernel.input == Variable::Yc {
        base.require_construct()?;
    }
    let base_input = base.support(kernel.input);
    // map base label index -> kernel row index
    let map: Vec<Option<usize>> = base_input.iter().map(|l| kernel.input_support.index_of(l)).collect();
    let (nc, no, _) = base.dims();
    let np_out = kernel.output.len();
    let mut masses = vec![T::zero(); 2 * nc * no];
    for ([z, c, o, _], m) in base.cells() {
        let slot = &mut masses[(z * nc + c) * no + o];
        *slot += m;
    }
    let mut supports: Supports = base.supports();
    supports.predicted = kernel.output.clone();
    let mut table = vec![T::zero(); 2 * nc * no * np_out];
    for z in 0..2 {
        for c in 0..nc {
            for o in 0..no {
                let m = &masses[(z * nc + c) * no + o];
                if m.is_zero() {
                    continue;
                }
                let x = if kernel.input == Variable::Yc { c } else { o };
                let row = map[x].and_then(|k| kernel.row(z, k)).ok_or_else(|| {
                    AuditError::MissingKernelRow(format!("{}={}, Z={z}", kernel.input, base_input.get(x)))
                })?;
                for (p, w) in row.iter().enumerate() {
                    table[((z * nc + c) * no + o) * np_out + p] = m.clone() * w.clone();
                }
            }
        }
    }
    // base masses times stochastic rows: still a probability table
    Ok(JointDistribution::from_dense_trusted(supports, table))
}

/// Convenience: `Yp` as a labelled deterministic function of the kernel input and `Z`.
pub fn deterministic_kernel<T: Scalar>(
    input: Variable,
    input_support: Support,
    output: Support,
    f: impl Fn(u8, &Label) -> Label,
) -> Result<ModelKernel<T>> {
    let mut rows: [Vec<Option<Vec<T>>>; 2] = [Vec::new(), Vec::new()];
    for (z, slot) in rows.iter_mut().enumerate() {
        for x in input_support.iter() {
            let y = f(z as u8, x);
            let j = output
                .index_of(&y)
                .ok_or_else(|| AuditError::UnknownLabel { variable: "Yp".into(), label: y.to_string() })?;
            slot.push(Some((0..output.len()).map(|k| if k == j { T::one() } else { T::zero() }).collect()));
        }
    }
    ModelKernel::new(input, input_support, output, rows)
}
