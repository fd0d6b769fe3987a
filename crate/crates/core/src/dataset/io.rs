use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Dataset, Split, SplitRatios};
use crate::error::{Error, Result};

/// Writes pretty-printed JSON with a trailing newline.
pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset) -> Result<()> {
    let path = path.as_ref();
    let json = serde_json::to_string_pretty(dataset).expect("dataset serializes");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Reads and validates a dataset file.
pub fn read_dataset(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let dataset: Dataset =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    dataset.validate()?;
    Ok(dataset)
}

#[derive(Serialize)]
struct SplitManifest<'a> {
    seed: u64,
    ratios: SplitRatios,
    train: Vec<&'a str>,
    dev: Vec<&'a str>,
    test: Vec<&'a str>,
}

/// Writes `train.json`, `dev.json`, `test.json` and `split.json` (seed,
/// ratios, and sorted patient ids per part) under `dir`.
pub fn write_split(dir: impl AsRef<Path>, split: &Split) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    for (name, part) in [
        ("train", &split.train),
        ("dev", &split.dev),
        ("test", &split.test),
    ] {
        let path = dir.join(format!("{name}.json"));
        write_dataset(&path, part)?;
        written.push(path);
    }
    let manifest = SplitManifest {
        seed: split.seed,
        ratios: split.ratios,
        train: split.train.patients(),
        dev: split.dev.patients(),
        test: split.test.patients(),
    };
    let path = dir.join("split.json");
    let json = serde_json::to_string_pretty(&manifest).expect("split manifest serializes");
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}
