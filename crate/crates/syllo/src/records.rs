//! Line-delimited record types. Field order in each struct is the field order
//! on disk.

use serde::{Deserialize, Serialize};
use syllo_core::episode::{Alignment, Experiment};
use syllo_core::{Formula, KnowledgeBase, LogicError, MinimalInference, Purpose, Quantifier};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PremiseRecord {
    pub q: char,
    pub subj: u32,
    pub obj: u32,
}

impl From<&Formula> for PremiseRecord {
    fn from(f: &Formula) -> Self {
        PremiseRecord { q: f.q.letter(), subj: f.subj.0, obj: f.obj.0 }
    }
}

impl PremiseRecord {
    pub fn to_formula(self) -> Option<Formula> {
        Some(Formula::new(Quantifier::from_letter(self.q)?, self.subj, self.obj))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbRecord {
    pub id: String,
    pub purpose: Purpose,
    pub n_terms: u32,
    pub premises: Vec<PremiseRecord>,
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("knowledge base {id}: unknown quantifier {q:?}")]
    Quantifier { id: String, q: char },
    #[error("knowledge base {id}: {source}")]
    Logic { id: String, source: LogicError },
}

impl KbRecord {
    pub fn new(kb: &KnowledgeBase, purpose: Purpose) -> Self {
        KbRecord {
            id: kb.id().to_string(),
            purpose,
            n_terms: kb.n_terms(),
            premises: kb.premises().iter().map(PremiseRecord::from).collect(),
        }
    }

    pub fn to_kb(&self) -> Result<KnowledgeBase, RecordError> {
        let premises = self
            .premises
            .iter()
            .map(|p| p.to_formula().ok_or(RecordError::Quantifier { id: self.id.clone(), q: p.q }))
            .collect::<Result<Vec<_>, _>>()?;
        KnowledgeBase::new(self.id.clone(), self.n_terms, premises)
            .map_err(|source| RecordError::Logic { id: self.id.clone(), source })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InferenceRecord {
    pub kb_id: String,
    pub hypothesis: PremiseRecord,
    pub itype: u8,
    pub length: usize,
    /// Premise indices into the knowledge base, ascending.
    pub premises: Vec<usize>,
}

impl InferenceRecord {
    pub fn new(kb: &KnowledgeBase, inf: &MinimalInference) -> Self {
        InferenceRecord {
            kb_id: kb.id().to_string(),
            hypothesis: PremiseRecord::from(&inf.conclusion),
            itype: inf.itype.number(),
            length: inf.length,
            premises: inf.premises.to_vec(),
        }
    }
}

/// A rendered baseline datapoint.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: String,
    pub kb_id: String,
    pub variant: u8,
    pub itype: u8,
    pub length: usize,
    pub text: String,
    pub gold: Vec<String>,
}

/// A rendered episode.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub id: String,
    pub experiment: Experiment,
    pub split: Purpose,
    pub alignment: Alignment,
    pub itype: u8,
    pub length: usize,
    pub kb_id: String,
    pub variant: u8,
    pub text: String,
    pub gold: Vec<String>,
}

/// The fields the evaluator needs; both datapoint and episode records
/// deserialize into it.
#[derive(Clone, Debug, PartialEq, Eq, Deserialize)]
pub struct GoldRecord {
    pub id: String,
    pub itype: u8,
    pub length: usize,
    pub text: String,
    pub gold: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub episode_id: String,
    pub raw_text: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoredRecord {
    pub episode_id: String,
    pub itype: u8,
    pub length: usize,
    pub correct: bool,
    pub nvm: bool,
    pub map: bool,
    pub hp: bool,
    pub extra_count: usize,
    pub missing_a_count: usize,
}
