//! Total variation, earthmover distance, and Lipschitz constants on finite supports.

mod emd;
mod lipschitz;
mod metric;
mod oracle;
mod tv;

pub use emd::{certify, emd, emd_cost, solve_transport, TransportPlan, EMD_TOL};
pub use lipschitz::{kantorovich_dual_bound, lipschitz_constant};
pub use metric::{Metric, MetricSupport};
pub use oracle::{emd_1d_oracle, emd_bruteforce_oracle, BRUTE_FORCE_MAX};
pub use tv::{overlap, tv_distance};
