//! Structure of learned and induced graphs: centralities, cores, hierarchy,
//! clusters and hyperbolicity.

mod centrality;
mod clusters;
mod hierarchy;
mod hyperbolicity;
mod induce;
mod kcore;
mod report;

pub use centrality::{degree_centrality_top, eigenvector_centrality, frequency_percentiles, score_top, CentralityEntry};
pub use clusters::{chinese_whispers, chinese_whispers_with, Affinity, ClusterSet};
pub use hierarchy::{extract_hierarchy, hierarchy_correlations, HierarchyLevels, Taxonomy};
pub use hyperbolicity::{
    cluster_hyperbolicity, gromov_delta, quadruple_delta, ClusterHyperbolicity, Hyperbolicity, DEFAULT_SAMPLES,
    EXACT_LIMIT, MATRIX_LIMIT, MIN_CLUSTER_SIZE, POOL_SIZE,
};
pub use induce::{calibrate_tau, edge_density, induce_graph, InducedGraphSpec};
pub use kcore::{k_core, CoreDecomposition};
pub use report::{
    save_with, write_centrality_csv, write_core_csv, write_correlations_csv, write_hyperbolicity_csv,
    write_membership_tsv, CENTRALITY_HEADER, CORE_HEADER, CORRELATION_HEADER, HYPERBOLICITY_HEADER,
};
