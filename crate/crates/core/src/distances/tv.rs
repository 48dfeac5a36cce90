use crate::probability::{align, Distribution};
use crate::scalar::{Scalar, Total};

/// `½ Σ |p(y) - q(y)|` over the union of both supports.
pub fn tv_distance<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> T {
    let (_, a, b) = align(p, q);
    let total: T = a.into_iter().zip(b).map(|(x, y)| (x - y).abs()).total();
    total * T::half()
}

/// `Σ min(p(y), q(y))`, the diagonal mass of a maximal coupling.
pub fn overlap<T: Scalar>(p: &Distribution<T>, q: &Distribution<T>) -> T {
    let (_, a, b) = align(p, q);
    a.into_iter().zip(b).map(|(x, y)| if x <= y { x } else { y }).total()
}
