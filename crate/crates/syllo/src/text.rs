//! Reading rendered records back without access to the generator state: the
//! knowledge base and its word assignment are recovered from the text.

use std::collections::HashMap;

use syllo_core::render::{parse_template, KB_TAG, QUERY_TAG, STUDY_TAG};
use syllo_core::{Assignment, Formula, KnowledgeBase};

use crate::io::DataError;

/// A knowledge base recovered from text, with terms numbered by first
/// appearance.
#[derive(Clone, Debug)]
pub struct TextKb {
    pub kb: KnowledgeBase,
    pub asg: Assignment,
}

fn invalid(id: &str, msg: impl std::fmt::Display) -> DataError {
    DataError::Invalid(format!("record {id}: {msg}"))
}

/// The premise list between `knowledge base:` and the first tag.
pub fn kb_section(text: &str) -> Option<&str> {
    let rest = text.strip_prefix(KB_TAG)?;
    let end =
        [format!(" {STUDY_TAG} "), format!(" {QUERY_TAG} ")].iter().filter_map(|t| rest.find(t.as_str())).min()?;
    Some(rest[..end].trim())
}

pub fn kb_from_text(id: &str, text: &str) -> Result<TextKb, DataError> {
    let section = kb_section(text).ok_or_else(|| invalid(id, "no knowledge base section"))?;
    let mut names: Vec<String> = Vec::new();
    let mut index: HashMap<String, u32> = HashMap::new();
    let mut premises = Vec::new();
    for item in section.split(", ") {
        let (q, s, o) = parse_template(item).ok_or_else(|| invalid(id, format!("unreadable premise {item:?}")))?;
        let mut term = |w: &str| {
            *index.entry(w.to_lowercase()).or_insert_with(|| {
                names.push(w.to_string());
                names.len() as u32 - 1
            })
        };
        let (s, o) = (term(s), term(o));
        premises.push(Formula::new(q, s, o));
    }
    let asg = Assignment::new(names).map_err(|e| invalid(id, e))?;
    let kb = KnowledgeBase::new(id, asg.names().len() as u32, premises).map_err(|e| invalid(id, e))?;
    Ok(TextKb { kb, asg })
}

/// Gold strings as formulas of the recovered knowledge base.
pub fn gold_formulas(id: &str, tkb: &TextKb, gold: &[String]) -> Result<Vec<Formula>, DataError> {
    gold.iter()
        .map(|g| {
            let f = syllo_core::render::parse_formula(g, &tkb.asg)
                .map_err(|e| invalid(id, format!("gold {g:?}: {e:?}")))?;
            tkb.kb.position(&f).ok_or_else(|| invalid(id, format!("gold {g:?} is not a premise")))?;
            Ok(f)
        })
        .collect()
}
