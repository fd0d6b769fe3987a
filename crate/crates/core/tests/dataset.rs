mod common;

use std::collections::HashSet;

use common::{idu_notes, no_keyword_notes};
use iduqa::dataset::{
    build_dataset, read_dataset, split_by_patient, write_dataset, write_split, Dataset, Pairing,
    SplitRatios,
};
use iduqa::extract::Annotator;
use iduqa::Error;
use proptest::prelude::*;

fn dataset(n: usize, empty: usize) -> Dataset {
    build_dataset(
        &idu_notes(n),
        &no_keyword_notes(empty),
        &Annotator::builtin(),
        Pairing::AllVariants,
    )
    .unwrap()
}

#[test]
fn answers_sit_at_their_char_offsets() {
    let d = dataset(30, 5);
    d.validate().unwrap();
    for (entry, sample) in d.samples() {
        for a in &sample.answers {
            let found: String = entry
                .context
                .chars()
                .skip(a.answer_start)
                .take(a.text.chars().count())
                .collect();
            assert_eq!(found, a.text, "{}", sample.id);
        }
        assert_eq!(sample.is_impossible, sample.answers.is_empty());
    }
}

#[test]
fn keyword_free_notes_only_give_impossible_samples() {
    let d = dataset(0, 4);
    assert!(d.sample_count() > 0);
    assert!(d
        .samples()
        .all(|(_, s)| s.is_impossible && s.query_group == "existence_of_idu"));
}

#[test]
fn sampled_pairing_limits_variants() {
    let a = Annotator::builtin();
    let all = build_dataset(&idu_notes(20), &[], &a, Pairing::AllVariants).unwrap();
    let one = build_dataset(&idu_notes(20), &[], &a, Pairing::SampleK { k: 1, seed: 3 }).unwrap();
    assert!(one.sample_count() < all.sample_count());
    let again = build_dataset(&idu_notes(20), &[], &a, Pairing::SampleK { k: 1, seed: 3 }).unwrap();
    assert_eq!(one, again);
}

#[test]
fn round_trip_through_disk() {
    let d = dataset(10, 2);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.json");
    write_dataset(&path, &d).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), d);
}

#[test]
fn corrupted_offsets_are_rejected() {
    let mut d = dataset(5, 0);
    let sample = d.entries[0]
        .qas
        .iter_mut()
        .find(|s| !s.is_impossible)
        .unwrap();
    sample.answers[0].answer_start += 1;
    let id = sample.id.clone();
    match d.validate() {
        Err(Error::Validation { sample_id, .. }) => assert_eq!(sample_id, id),
        other => panic!("expected a validation error, got {other:?}"),
    }
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    write_dataset(&path, &d).unwrap();
    assert!(read_dataset(&path).is_err());
}

#[test]
fn duplicate_ids_and_bad_flags_are_rejected() {
    let mut d = dataset(5, 0);
    let first = d.entries[0].qas[0].clone();
    d.entries[1].qas.push(first);
    assert!(matches!(d.validate(), Err(Error::Validation { .. })));

    let mut d = dataset(5, 0);
    d.entries[0].qas[0].is_impossible = true;
    assert!(matches!(d.validate(), Err(Error::Validation { .. })));
}

#[test]
fn split_files_list_disjoint_patients() {
    let d = dataset(20, 4);
    let split = split_by_patient(&d, SplitRatios::default(), 11).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let files = write_split(dir.path(), &split).unwrap();
    assert_eq!(files.len(), 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("split.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seed"], 11);
    let mut seen = HashSet::new();
    for part in ["train", "dev", "test"] {
        for p in manifest[part].as_array().unwrap() {
            assert!(seen.insert(p.as_str().unwrap().to_string()));
        }
        assert_eq!(
            read_dataset(dir.path().join(format!("{part}.json")))
                .unwrap()
                .version,
            d.version
        );
    }
    assert_eq!(seen.len(), d.patients().len());
}

#[test]
fn ratios_must_sum_to_one() {
    assert!(SplitRatios::new(0.8, 0.1, 0.2).is_err());
    assert!(SplitRatios::new(0.6, 0.2, 0.2).is_ok());
    assert!(split_by_patient(&dataset(2, 0), SplitRatios::default(), 0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_is_a_deterministic_patient_partition(n in 3usize..40, seed in any::<u64>()) {
        let d = dataset(n, n / 4);
        let a = split_by_patient(&d, SplitRatios::default(), seed).unwrap();
        let b = split_by_patient(&d, SplitRatios::default(), seed).unwrap();
        prop_assert_eq!(&a, &b);

        let parts = [&a.train, &a.dev, &a.test];
        let mut all = HashSet::new();
        let mut samples = 0;
        for p in parts {
            for pid in p.patients() {
                prop_assert!(all.insert(pid));
            }
            samples += p.sample_count();
        }
        prop_assert_eq!(all.len(), d.patients().len());
        prop_assert_eq!(samples, d.sample_count());
    }
}
