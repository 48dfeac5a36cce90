use crate::error::{AuditError, Result};
use crate::probability::{Distribution, Label};
use crate::scalar::{Scalar, FLOAT_TOL};

use super::metric::MetricSupport;

/// Smallest `ρ` with `|f(u) - f(v)| <= ρ·d(u, v)` over the labels where `f` is given.
///
/// Every label in `f` must belong to `ms`.
pub fn lipschitz_constant<T: Scalar>(f: &[(Label, T)], ms: &MetricSupport) -> Result<T> {
    let idx = f
        .iter()
        .map(|(l, _)| ms.support().index_of(l).ok_or_else(|| AuditError::MetricMismatch(l.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut best = T::zero();
    for a in 0..f.len() {
        for b in a + 1..f.len() {
            let d: T = ms.distance(idx[a], idx[b]);
            let slope = (f[a].1.clone() - f[b].1.clone()).abs() / d;
            if slope > best {
                best = slope;
            }
        }
    }
    Ok(best)
}

/// `E_q[φ] - E_p[φ]`, a lower bound on the EMD for any 1-Lipschitz `φ`.
pub fn kantorovich_dual_bound<T: Scalar>(
    p: &Distribution<T>,
    q: &Distribution<T>,
    ms: &MetricSupport,
    phi: &[(Label, T)],
) -> Result<T> {
    let rho = lipschitz_constant(phi, ms)?;
    if rho > T::one() + T::slack(FLOAT_TOL) {
        return Err(AuditError::NotLipschitz(rho.render()));
    }
    let a = p.extend_to(ms.support())?;
    let b = q.extend_to(ms.support())?;
    let value = |label: &Label| -> Result<T> {
        phi.iter()
            .find(|(l, _)| l == label)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| AuditError::InvalidParameter(format!("test function undefined at `{label}`")))
    };
    let mut total = T::zero();
    for ((label, pa), pb) in a.iter().zip(b.probs()) {
        if pa.is_zero() && pb.is_zero() {
            continue;
        }
        total = total + value(label)? * (pb.clone() - pa.clone());
    }
    Ok(total)
}
