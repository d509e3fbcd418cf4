//! Sample quantiles of symmetric kernels over all m-subsets of a sample
//! ("U-quantile-statistics"), together with the machinery for asymptotic
//! inference on them.
//!
//! A U-statistic averages a symmetric kernel `h` over every m-subset of the
//! sample. A U-quantile-statistic takes the sample p-quantile of the same
//! `C(n, m)` kernel values instead. The median of pairwise averages
//! (a Hodges-Lehmann type location estimator) and the median interpoint
//! distance are the two canonical examples.
//!
//! Modules:
//!
//! * [`kernels`]: the [`Kernel`] trait and the built-in kernels.
//! * [`engine`]: enumeration, counting and selection of the quantile.
//! * [`asymptotics`]: plug-in variance constants, density at the quantile,
//!   confidence intervals, relative efficiency and closed-form oracles.
//! * [`montecarlo`]: a seeded simulation harness for checking the limit law.
//! * [`report`]: JSON/CSV output with canonical float formatting.
//!
//! ```
//! use uquantile::engine::{u_quantile, Backend, EngineConfig, QuantileSpec};
//! use uquantile::{KernelSpec, Sample};
//!
//! let x = Sample::scalar(vec![1.0, 2.0, 3.0]).unwrap();
//! let est = u_quantile(&x, &KernelSpec::Walsh, QuantileSpec::median(), Backend::Auto, &EngineConfig::default()).unwrap();
//! // pairwise averages 1.5, 2.0, 2.5
//! assert_eq!((est.value, est.total_count, est.selected_rank), (2.0, 3, 2));
//! ```

pub mod asymptotics;
pub mod distributions;
pub mod engine;
mod error;
pub mod kernels;
pub mod montecarlo;
pub mod quadrature;
pub mod report;
pub mod rng;
pub mod sample;
pub mod scenario;
pub mod stats;

pub use error::{Error, Result};
pub use kernels::{Kernel, KernelSpec, Norm};
pub use sample::Sample;
