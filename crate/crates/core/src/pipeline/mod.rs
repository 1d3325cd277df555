//! End-to-end workflow: preprocess, optional sweeps and topic-count
//! selection, final training, topic analysis, inconsistency analysis and a
//! hashed report bundle.
//!
//! All randomness comes from the config's root seed. A stage seed is the
//! first eight bytes (little endian) of `SHA-256(root_seed_le || stage_name)`,
//! with stage names `"split"` and `"lda"`.

pub mod config;
pub mod prepare;
pub mod report;
pub mod sweep;

use sha2::{Digest, Sha256};

pub use config::Config;
pub use prepare::PreparedCorpus;
pub use report::{replay_manifest, run_pipeline, Manifest};
pub use sweep::{
    decoupling_check, run_sweep, select_num_topics, SweepData, SweepParameter, SweepResult,
    SweepSpec,
};

pub fn stage_seed(root: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(root.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}
