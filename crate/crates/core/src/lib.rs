//! Radiology report knowledge-graph pipeline: corpus cleaning, annotation,
//! triple extraction, graph construction, report generation and evaluation.

pub mod annotation;
pub mod eval;
pub mod extract;
pub mod generate;
pub mod kg;
pub mod lexicon;
pub mod ontology;
pub mod par;
pub mod preprocess;
pub mod text;
