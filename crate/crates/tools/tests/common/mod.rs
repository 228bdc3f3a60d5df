#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use gesturelog_core::dataset::{synthetic, SyntheticParams};
use gesturelog_core::{LandmarkClassifier, TrainingConfig};
use gesturelog_server::{AppState, ServerConfig};
use gesturelog_tools::train::train_eval;

/// Predicts Fist with probability 0.9 for every input.
pub fn fist_model() -> LandmarkClassifier {
    let mut b2 = vec![0.0; 5];
    b2[0] = (0.9f64 / 0.025).ln();
    LandmarkClassifier::from_parts(1, vec![0.0; 63], vec![0.0], vec![0.0; 5], b2).unwrap()
}

/// Trained once per test binary on the default synthetic dataset.
pub fn trained_model() -> LandmarkClassifier {
    static MODEL: OnceLock<LandmarkClassifier> = OnceLock::new();
    MODEL
        .get_or_init(|| {
            let ds = synthetic(&SyntheticParams::default(), 11);
            train_eval(&ds, 11, &TrainingConfig { seed: 11, ..Default::default() }).unwrap().model
        })
        .clone()
}

/// Starts a server on an ephemeral loopback port; returns its base URL.
pub async fn spawn_server(model: LandmarkClassifier, config: ServerConfig) -> (String, AppState) {
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    let state = AppState::new(model, config);
    tokio::spawn(gesturelog_server::serve(listener, state.clone()));
    (format!("http://{addr}"), state)
}

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// With `GESTURELOG_BLESS=1` the expected file is rewritten instead of compared.
pub fn check_golden(path: &std::path::Path, actual: &[u8]) -> Result<(), String> {
    if std::env::var_os("GESTURELOG_BLESS").is_some() {
        std::fs::write(path, actual).unwrap();
        return Ok(());
    }
    let expected = std::fs::read(path).map_err(|e| format!("{}: {e}", path.display()))?;
    if expected == actual {
        Ok(())
    } else {
        Err(format!("{} differs from output ({} vs {} bytes)", path.display(), expected.len(), actual.len()))
    }
}
