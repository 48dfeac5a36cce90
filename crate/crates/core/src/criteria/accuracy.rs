use crate::empirical::observed_disparity;
use crate::error::{AuditError, Result};
use crate::probability::{JointDistribution, Variable};
use crate::scalar::{Scalar, Total};

use super::construct_disparity;

/// `½ (Pr[Yc = Yp | Z=0] + Pr[Yc = Yp | Z=1])`.
pub fn construct_accuracy<T: Scalar>(dist: &JointDistribution<T>) -> Result<T> {
    dist.require_construct()?;
    let yc = dist.support(Variable::Yc);
    let yp = dist.support(Variable::Yp);
    if !yc.iter().any(|l| yp.contains(l)) {
        return Err(AuditError::SupportMismatch);
    }
    let matched: Vec<Option<usize>> = yc.iter().map(|l| yp.index_of(l)).collect();
    let (_, no, _) = dist.dims();
    let hit = |z: usize| -> T {
        let m: T = matched
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (c, p)))
            .flat_map(|(c, p)| (0..no).map(move |o| dist.at(z, c, o, p).clone()))
            .total();
        m / dist.z_mass(z as u8)
    };
    Ok((hit(0) + hit(1)) * T::half())
}

/// Accuracy ceiling for any model passing demographic parity: `1 - ½ tv(Yc..)`.
pub fn max_accuracy_under_dem_parity<T: Scalar>(dist: &JointDistribution<T>) -> Result<T> {
    Ok(T::one() - T::half() * construct_disparity(dist)?)
}

/// Accuracy ceiling `1 - ½(α - α')·tv(Yo..)` for a model passing the α'-disparity
/// test when the α-Hybrid worldview holds. Only the observed column is read.
pub fn max_accuracy_under_alpha_disparity<T: Scalar>(
    dist: &JointDistribution<T>,
    alpha: &T,
    alpha_prime: &T,
) -> Result<T> {
    if alpha <= alpha_prime {
        return Err(AuditError::WrongOrder(format!("alpha ({}) > alpha' ({})", alpha.render(), alpha_prime.render())));
    }
    Ok(T::one() - T::half() * (alpha.clone() - alpha_prime.clone()) * observed_disparity(dist))
}
