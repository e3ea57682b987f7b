use std::collections::BTreeMap;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::geometry::lemmas::CALIBRATED_ALPHA;
use crate::patterson::AtomicBoundaryMeasure;

/// CSV schema version stamped on every output.
pub const SCHEMA_VERSION: u32 = 1;

/// Record of one command run. The hash covers the inputs only (command,
/// config hash, resolved parameters, tool and schema versions, α), so two
/// runs with equal manifests carry equal hashes and write equal files.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config_hash: String,
    pub parameters: BTreeMap<String, String>,
    pub tool_version: String,
    pub schema_version: u32,
    pub calibrated_alpha: f64,
    pub delta_hats: BTreeMap<String, f64>,
    pub measure_stamps: Vec<String>,
    pub outputs: Vec<String>,
    pub wall_time_s: f64,
}

#[derive(Serialize)]
struct HashedPart<'a> {
    command: &'a str,
    config_hash: &'a str,
    parameters: &'a BTreeMap<String, String>,
    tool_version: &'a str,
    schema_version: u32,
    calibrated_alpha: f64,
}

impl RunManifest {
    pub fn new(command: &str, config_hash: &str, parameters: BTreeMap<String, String>) -> Self {
        RunManifest {
            command: command.to_string(),
            config_hash: config_hash.to_string(),
            parameters,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            schema_version: SCHEMA_VERSION,
            calibrated_alpha: CALIBRATED_ALPHA,
            delta_hats: BTreeMap::new(),
            measure_stamps: Vec::new(),
            outputs: Vec::new(),
            wall_time_s: 0.0,
        }
    }

    pub fn hash(&self) -> String {
        let part = HashedPart {
            command: &self.command,
            config_hash: &self.config_hash,
            parameters: &self.parameters,
            tool_version: &self.tool_version,
            schema_version: self.schema_version,
            calibrated_alpha: self.calibrated_alpha,
        };
        hex::encode(Sha256::digest(
            serde_json::to_vec(&part).expect("serializable"),
        ))
    }

    /// `#` lines opening every CSV.
    pub fn csv_header(&self) -> String {
        format!(
            "# horoshadow schema v{}\n# manifest {}\n# config {}\n# command {}\n",
            self.schema_version,
            self.hash(),
            self.config_hash,
            self.command
        )
    }

    pub fn stamp_measure(&mut self, mu: &AtomicBoundaryMeasure, atoms: usize) {
        self.measure_stamps.push(format!(
            "s={} T={} atoms={atoms} tail_fraction={} spec={}",
            mu.s_used, mu.t_used, mu.tail_fraction, mu.spec_hash
        ));
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct WithHash<'a> {
            manifest_hash: String,
            #[serde(flatten)]
            manifest: &'a RunManifest,
        }
        let mut s = serde_json::to_string_pretty(&WithHash {
            manifest_hash: self.hash(),
            manifest: self,
        })
        .expect("serializable");
        s.push('\n');
        s
    }
}
