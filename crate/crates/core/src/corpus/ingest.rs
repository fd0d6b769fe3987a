use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Note;
use crate::error::{Error, Result};

pub const CORPUS_FORMAT_VERSION: &str = "1.0";

/// Cleaned corpus as persisted between stages.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusFile {
    pub version: String,
    pub notes: Vec<Note>,
}

#[derive(Debug, Deserialize)]
struct ManifestRow {
    note_id: String,
    patient_id: String,
    date: String,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    path: Option<String>,
}

/// Reads a delimited manifest with columns `note_id, patient_id, date` and
/// either `text` (inline note text) or `path` (file relative to the
/// manifest). The delimiter is a comma, or a tab for `.tsv` files.
pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<Note>> {
    let path = path.as_ref();
    let delimiter = if path.extension().is_some_and(|e| e == "tsv") {
        b'\t'
    } else {
        b','
    };
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .trim(csv::Trim::Headers)
        .from_reader(file);
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut notes = Vec::new();
    let mut seen = HashSet::new();
    for (line, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let what = || format!("{} row {}", path.display(), line + 2);
        let row = row.map_err(|e| Error::parse(what(), e))?;
        let date = chrono::NaiveDate::parse_from_str(row.date.trim(), "%Y-%m-%d")
            .map_err(|e| Error::parse(what(), format!("date `{}`: {e}", row.date)))?;
        let raw = match (row.text, row.path) {
            (Some(text), _) if !text.is_empty() => text,
            (_, Some(p)) if !p.is_empty() => {
                let file = base.join(p.trim());
                std::fs::read_to_string(&file).map_err(|e| Error::io(file, e))?
            }
            _ => return Err(Error::parse(what(), "neither `text` nor `path` is set")),
        };
        if !seen.insert(row.note_id.clone()) {
            return Err(Error::parse(
                what(),
                format!("duplicate note_id `{}`", row.note_id),
            ));
        }
        notes.push(Note::new(row.note_id, row.patient_id, date, raw));
    }
    Ok(notes)
}

pub fn write_corpus(path: impl AsRef<Path>, notes: &[Note]) -> Result<()> {
    let path = path.as_ref();
    let file = CorpusFile {
        version: CORPUS_FORMAT_VERSION.to_string(),
        notes: notes.to_vec(),
    };
    let json = serde_json::to_string_pretty(&file).expect("corpus serializes");
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Reads a corpus written by [`write_corpus`]. A path ending in `.csv` or
/// `.tsv` is read as a manifest instead.
pub fn read_corpus(path: impl AsRef<Path>) -> Result<Vec<Note>> {
    let path = path.as_ref();
    if path.extension().is_some_and(|e| e == "csv" || e == "tsv") {
        return read_manifest(path);
    }
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: CorpusFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(path.display().to_string(), e))?;
    let mut seen = HashSet::new();
    for note in &file.notes {
        if !seen.insert(note.note_id.as_str()) {
            return Err(Error::parse(
                path.display().to_string(),
                format!("duplicate note_id `{}`", note.note_id),
            ));
        }
    }
    Ok(file.notes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_with_inline_and_path() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("n2.txt"), "h/o ivdu\n\n\nplan").unwrap();
        std::fs::write(
            dir.path().join("manifest.csv"),
            "note_id,patient_id,date,text,path\n\
             n1,p1,2022-01-03,\"social hx:\ndenies ivdu\",\n\
             n2,p1,2022-01-04,,n2.txt\n",
        )
        .unwrap();
        let notes = read_manifest(dir.path().join("manifest.csv")).unwrap();
        assert_eq!(notes.len(), 2);
        assert_eq!(notes[0].cleaned_text, "social hx: denies ivdu");
        assert_eq!(notes[1].cleaned_text, "h/o ivdu\nplan");

        let out = dir.path().join("corpus.json");
        write_corpus(&out, &notes).unwrap();
        assert_eq!(read_corpus(&out).unwrap(), notes);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(
            &path,
            "note_id,patient_id,date,text\nn1,p,2022-01-01,a\nn1,p,2022-01-01,b\n",
        )
        .unwrap();
        let err = read_manifest(&path).unwrap_err().to_string();
        assert!(err.contains("duplicate note_id"), "{err}");
    }

    #[test]
    fn bad_date_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        std::fs::write(&path, "note_id,patient_id,date,text\nn1,p,01/02/2022,a\n").unwrap();
        assert!(read_manifest(&path).is_err());
    }
}
