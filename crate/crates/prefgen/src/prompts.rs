//! Prompt templates. Built-in copies live in `prompts/*.txt`; any of them can
//! be replaced by a file at run time.

use std::path::Path;

const PLACEHOLDER: &str = "{description}";

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template(String);

impl Template {
    pub fn new(text: impl Into<String>) -> Self {
        Self(text.into())
    }

    pub fn from_file(path: &Path) -> std::io::Result<Self> {
        std::fs::read_to_string(path).map(Self)
    }

    /// The generation prompt wrapped around a description.
    pub fn generation() -> Self {
        Self::new(include_str!("../prompts/generation.txt"))
    }

    /// The harsh-grader prompt sent with each rendered candidate.
    pub fn grading() -> Self {
        Self::new(include_str!("../prompts/grading.txt"))
    }

    /// The correspondence prompt used for evaluation scoring.
    pub fn evaluation() -> Self {
        Self::new(include_str!("../prompts/evaluation.txt"))
    }

    /// The two captioning prompts, separated by a `---` line.
    pub fn caption() -> Self {
        Self::new(include_str!("../prompts/caption.txt"))
    }

    pub fn text(&self) -> &str {
        &self.0
    }

    pub fn fill(&self, description: &str) -> String {
        self.0.replace(PLACEHOLDER, description)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtins_have_placeholder() {
        for t in [Template::generation(), Template::grading(), Template::evaluation()] {
            assert!(t.text().contains(PLACEHOLDER));
            let filled = t.fill("a small disc");
            assert!(filled.contains("a small disc") && !filled.contains(PLACEHOLDER));
        }
        assert!(Template::grading().text().contains("score out of 10"));
    }
}
