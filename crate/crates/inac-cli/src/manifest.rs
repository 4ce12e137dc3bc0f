//! Run manifest: a deterministic TOML record of everything needed to
//! reproduce an experiment byte for byte, plus a content hash of the inputs.

use sha2::{Digest, Sha256};

use inac::analytic::BerFormulaMode;
use inac::config::to_toml_string;
use inac::SystemConfig;

pub struct Manifest {
    pub experiment: String,
    pub seed: u64,
    pub trials: u64,
    pub workers: usize,
    pub mode: BerFormulaMode,
    pub base_config: SystemConfig,
    pub grid_label: String,
    pub grid: Vec<f64>,
    pub outputs: Vec<String>,
    /// Free-form extra sections (already valid TOML).
    pub extra: Vec<(String, String)>,
}

impl Manifest {
    pub fn render(&self) -> String {
        let config_toml = to_toml_string(&self.base_config);
        let grid = self
            .grid
            .iter()
            .map(|v| inac::util::fmt_f64(*v))
            .collect::<Vec<_>>()
            .join(", ");
        let inputs = format!(
            "{}|{}|{}|{}|{}|{}|{}",
            self.experiment,
            self.seed,
            self.trials,
            self.workers,
            self.mode.tag(),
            grid,
            config_toml
        );
        let hash = hex(&Sha256::digest(inputs.as_bytes()));
        let mut out = String::new();
        out.push_str("[run]\n");
        out.push_str(&format!("experiment = {:?}\n", self.experiment));
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("trials = {}\n", self.trials));
        out.push_str(&format!("workers = {}\n", self.workers));
        out.push_str(&format!("mode = {:?}\n", self.mode.tag()));
        out.push_str(&format!("grid_label = {:?}\n", self.grid_label));
        out.push_str(&format!("grid = [{grid}]\n"));
        out.push_str(&format!(
            "outputs = [{}]\n",
            self.outputs
                .iter()
                .map(|o| format!("{o:?}"))
                .collect::<Vec<_>>()
                .join(", ")
        ));
        out.push_str(&format!("content_hash = {hash:?}\n"));
        for (name, body) in &self.extra {
            out.push_str(&format!("\n[{name}]\n{body}"));
        }
        out.push_str("\n[config]\n");
        out.push_str(&config_toml);
        out
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
