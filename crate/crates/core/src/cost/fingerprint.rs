//! Short content hashes identifying the inputs of a cost run.

use sha2::{Digest, Sha256};

use crate::hjb::ModelSpec;
use crate::noise::NoiseSpec;
use crate::policy::{write_policy, LipschitzPolicy};

fn digest(text: &str) -> String {
    let hash = Sha256::digest(text.as_bytes());
    hash.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

/// Hash of the model's parameters and of its coefficient functions sampled
/// on a fixed set of states and actions.
pub fn model_fingerprint(ms: &ModelSpec) -> String {
    let mut text = format!(
        "{}|{:?}|{:?}|{:?}|{:?}",
        ms.name, ms.cost_bound, ms.discount, ms.actions, ms.half_width
    );
    for i in 0..=16 {
        let x = -ms.half_width + ms.half_width * i as f64 / 8.0;
        let u = ms.actions.0 + (ms.actions.1 - ms.actions.0) * (i % 5) as f64 / 4.0;
        text.push_str(&format!(
            "|{:?},{:?},{:?},{:?}",
            (ms.drift)(x, u),
            (ms.diffusion)(x),
            (ms.running_cost)(x, u),
            (ms.terminal_cost)(x)
        ));
    }
    digest(&text)
}

pub fn noise_fingerprint(noise: &NoiseSpec) -> String {
    digest(&serde_json::to_string(noise).unwrap_or_default())
}

pub fn policy_fingerprint(policy: &LipschitzPolicy) -> String {
    digest(&write_policy(policy))
}
