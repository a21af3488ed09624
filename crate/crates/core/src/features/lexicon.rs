use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::events::{AccountProfile, AccountTag};

/// Terms whose presence in a profile field marks it as bot-like.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubstringLexicon {
    terms: Vec<String>,
}

pub const DEFAULT_TERMS: [&str; 8] = ["bot", "auto", "ci", "cla", "code", "io", "logic", "assist"];

impl Default for SubstringLexicon {
    fn default() -> Self {
        Self {
            terms: DEFAULT_TERMS.iter().map(|t| t.to_string()).collect(),
        }
    }
}

impl SubstringLexicon {
    pub fn new<I, S>(terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let terms: Vec<String> = terms
            .into_iter()
            .map(|t| t.as_ref().trim().to_lowercase())
            .filter(|t| !t.is_empty())
            .collect();
        if terms.is_empty() {
            return Err(Error::invalid("lexicon must contain at least one term"));
        }
        Ok(Self { terms })
    }

    /// Parses a comma-separated term list.
    pub fn parse(list: &str) -> Result<Self> {
        Self::new(list.split(','))
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    /// First term occurring in `text`, case-insensitively.
    pub fn first_hit(&self, text: &str) -> Option<&str> {
        let lower = text.to_lowercase();
        self.terms
            .iter()
            .find(|t| lower.contains(t.as_str()))
            .map(String::as_str)
    }
}

/// 1 when the text contains any lexicon term as a plain substring.
pub fn profile_flag(text: Option<&str>, lexicon: &SubstringLexicon) -> u8 {
    text.and_then(|t| lexicon.first_hit(t)).is_some() as u8
}

pub fn tag_flag(profile: &AccountProfile) -> u8 {
    (profile.tag == AccountTag::Bot) as u8
}
