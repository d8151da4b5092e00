//! Preference data from rendered samples: draw several candidates per prompt
//! from a policy, render and score them, and pair strong candidates with weak
//! ones.

mod error;
pub mod lvm;
pub mod oracle;
pub mod pairs;
pub mod pipeline;
pub mod prompts;
pub mod sampling;

pub use error::{LvmError, PrefError};
pub use lvm::{LvmClient, LvmConfig};
pub use oracle::{score_oracle, OracleConfig, ScoredCandidate, SubScores};
pub use pairs::{build_pairs, check_pair, PairConfig, PreferencePair};
pub use pipeline::{generate_pairs, LvmScorer, OracleScorer, PipelineOutput, PipelineStats, PromptItem, Scorer};
pub use prompts::Template;
pub use sampling::{decode_one, sample_candidates, sample_token, Candidate, Policy, SamplingConfig};
