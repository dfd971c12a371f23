//! Correlation-based network analysis of multivariate return series.
//!
//! The crate computes rolling Pearson correlation matrices from price panels and derives
//! from them minimum spanning trees and planar maximally filtered graphs, map-equation
//! communities, link co-occurrence mutual information between successive graphs, Welch
//! tests on graph link populations, and eigenvalue statistics against the random-matrix
//! upper edge. Synthetic factor-model generators provide panels with known structure.

pub mod calendar;
pub mod corr;
pub mod error;
pub mod filtgraph;
pub mod io;
pub mod mapeq;
pub mod netinfo;
pub mod panel;
pub mod pipeline;
pub mod spectral;
pub mod stats;
pub mod synth;

pub use calendar::Month;
pub use corr::{correlation_surface, mean_offdiag, pearson_matrix, CorrelationMatrix, CorrelationSurface};
pub use error::{Error, GraphSide, Result};
pub use filtgraph::{degree_profile, is_planar, mst, pmfg, Edge, FilteredGraph, GraphKind};
pub use mapeq::{detect_communities, map_equation, CommunityOptions, Partition, Weighting};
pub use netinfo::{link_mutual_information, rolling_mi, LinkMIResult};
pub use panel::{load_prices, log_returns, FillPolicy, PricePanel, ReturnPanel, ReturnWindow};
pub use spectral::{count_above_threshold, eigen_decompose, eigen_series, rmt_upper_bound, SpectralSummary};
pub use stats::{mst_vs_pmfg_pvalues, welch_ttest, WelchResult};
pub use synth::{gen_blocks, gen_equicorrelated, gen_regime_shift, FactorSpec};
pub use pipeline::{run_pipeline, PipelineConfig, PipelineReport};
