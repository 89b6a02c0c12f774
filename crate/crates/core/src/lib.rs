//! Learning lifted STRIPS domains from labeled state graphs by SAT.

pub mod graph;
pub mod strips;
pub mod hyperspace;
pub mod cnf;
pub mod encoder;
pub mod sat;
pub mod decode;
pub mod verify;
pub mod fixtures;
pub mod pipeline;
