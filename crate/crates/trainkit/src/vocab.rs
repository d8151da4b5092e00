use std::collections::HashMap;

use crate::error::TrainError;
use crate::synth;

pub const BOS: &str = "<bos>";
pub const EOS: &str = "<eos>";
pub const PAD: &str = "<pad>";
pub const SEP: &str = "<sep>";

/// Token/id tables: sequence tokens, then prompt words, then the four
/// control tokens.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    ids: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn new(tokens: Vec<String>) -> Result<Self, TrainError> {
        let mut ids = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if ids.insert(t.clone(), i).is_some() {
                return Err(TrainError::Vocabulary(format!("duplicate token {t:?}")));
            }
        }
        for special in [BOS, EOS, PAD, SEP] {
            if !ids.contains_key(special) {
                return Err(TrainError::Vocabulary(format!("missing {special}")));
            }
        }
        Ok(Self { tokens, ids })
    }

    /// The vocabulary for the synthetic prompt grammar.
    pub fn standard() -> Self {
        let mut tokens = sem_core::token::vocabulary();
        tokens.extend(synth::prompt_words().iter().map(|w| w.to_string()));
        tokens.extend([BOS, EOS, PAD, SEP].map(String::from));
        Self::new(tokens).expect("built-in vocabulary is consistent")
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn id(&self, token: &str) -> Option<usize> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: usize) -> &str {
        &self.tokens[id]
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    fn special(&self, t: &str) -> usize {
        self.ids[t]
    }

    pub fn bos(&self) -> usize {
        self.special(BOS)
    }

    pub fn eos(&self) -> usize {
        self.special(EOS)
    }

    pub fn sep(&self) -> usize {
        self.special(SEP)
    }

    pub fn encode(&self, text: &str) -> Result<Vec<usize>, TrainError> {
        text.split_whitespace()
            .map(|w| self.id(w).ok_or_else(|| TrainError::UnknownWord(w.to_string())))
            .collect()
    }

    pub fn decode(&self, ids: &[usize]) -> String {
        ids.iter().map(|&i| self.token(i)).collect::<Vec<_>>().join(" ")
    }

    /// `<bos> prompt <sep>`: the conditioning prefix.
    pub fn prompt_prefix(&self, prompt: &str) -> Result<Vec<usize>, TrainError> {
        let mut out = vec![self.bos()];
        out.extend(self.encode(prompt)?);
        out.push(self.sep());
        Ok(out)
    }

    /// Full training example `<bos> prompt <sep> sequence <eos>` and the
    /// length of the prefix.
    pub fn example(&self, prompt: &str, sequence: &str) -> Result<(Vec<usize>, usize), TrainError> {
        let mut ids = self.prompt_prefix(prompt)?;
        let prefix = ids.len();
        ids.extend(self.encode(sequence)?);
        ids.push(self.eos());
        Ok((ids, prefix))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_is_small_and_bijective() {
        let v = Vocabulary::standard();
        assert!(v.len() < 256);
        for (i, t) in v.tokens().iter().enumerate() {
            assert_eq!(v.id(t), Some(i));
        }
    }

    #[test]
    fn example_layout() {
        let v = Vocabulary::standard();
        let (ids, prefix) = v.example("a small thin round disc with one hole", "line 1 2 <curve_end>").unwrap();
        assert_eq!(ids[0], v.bos());
        assert_eq!(ids[prefix - 1], v.sep());
        assert_eq!(*ids.last().unwrap(), v.eos());
        assert_eq!(v.decode(&ids[prefix..ids.len() - 1]), "line 1 2 <curve_end>");
    }

    #[test]
    fn rejects_unknown_and_duplicates() {
        let v = Vocabulary::standard();
        assert!(matches!(v.encode("a purple plate"), Err(TrainError::UnknownWord(w)) if w == "purple"));
        let dup = vec!["x".into(), "x".into()];
        assert!(Vocabulary::new(dup).is_err());
    }
}
