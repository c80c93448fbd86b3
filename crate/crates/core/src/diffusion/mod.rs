//! Attribution of vogue pairs to institutions, the producer -> adopter flow
//! network, its core/periphery split and journal overlap.

mod attribution;
mod flow;
mod journal;
mod scc;

use thiserror::Error;

pub use attribution::{attribute_pairs, AttributedDoc, PairAttribution, ProducerRule};
pub use flow::{build_flow, flow_shares, FlowNetwork, FlowOptions, FlowShares};
pub use journal::{journal_overlap, network_overlap, read_journal_meta, write_journal_csv, JournalMeta, JournalOverlapRow};
pub use scc::{core_periphery, tarjan_scc, CoreLabel, CoreRule};

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("document {doc} cites unknown institution {institution:?}")]
    UnknownInstitution { doc: String, institution: String },
    #[error("flow node {0:?} has no core/periphery label")]
    MissingLabel(String),
    #[error("malformed table: {0}")]
    Format(String),
    #[error(transparent)]
    Corpus(#[from] crate::corpus::CorpusError),
}
