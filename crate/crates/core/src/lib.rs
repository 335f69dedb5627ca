//! Flow polytopes of DAGs: framings, DKK triangulations, ample framings,
//! gentle algebras and the poset on maximal cliques.

pub mod analysis;
pub mod dag_core;
pub mod ehrhart_oracle;
pub mod framing;
pub mod gentle;
pub mod instances;
pub mod io;
pub mod poset;
pub mod triangulation;

pub use dag_core::{
    complete_contraction, enumerate_routes, flow_dims, is_full, is_valid, ContractionTrace, Dag,
    DagError, Edge, EdgeId, Route, VertexId,
};
pub use framing::{EdgeLabeling, FramedDag, Framing, FramingError};
