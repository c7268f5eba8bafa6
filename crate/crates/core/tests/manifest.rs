use std::collections::BTreeSet;

use miniats_core::corpus::{check_source, corpus_dir, Expected, Manifest};

#[test]
fn every_entry_matches_its_verdict() {
    let manifest = Manifest::load().unwrap();
    for entry in &manifest.entries {
        let src = std::fs::read_to_string(corpus_dir().join(&entry.file)).unwrap();
        let prelude = entry.prelude.source();
        let checked = check_source(prelude.as_deref(), &src, &entry.file);
        match entry.expected {
            Expected::Accept => assert!(
                checked.accepted(),
                "{} should be accepted: {:?}",
                entry.file,
                checked.report.diagnostics
            ),
            Expected::Reject => {
                assert!(!checked.accepted(), "{} should be rejected", entry.file);
                let kind = entry.kind.as_deref().expect("rejected entries record a kind");
                assert!(
                    checked.report.diagnostics.iter().any(|d| d.kind.to_string() == kind),
                    "{}: expected {kind}, got {:?}",
                    entry.file,
                    checked.report.diagnostics
                );
            }
        }
    }
}

#[test]
fn manifest_covers_corpus_once() {
    let manifest = Manifest::load().unwrap();
    let listed: Vec<&str> = manifest.entries.iter().map(|e| e.file.as_str()).collect();
    let unique: BTreeSet<&str> = listed.iter().copied().collect();
    assert_eq!(unique.len(), listed.len(), "duplicate manifest entries");

    let mut on_disk = BTreeSet::new();
    for sub in ["", "mutations/"] {
        for f in std::fs::read_dir(corpus_dir().join(sub)).unwrap() {
            let name = f.unwrap().file_name().into_string().unwrap();
            if name.ends_with(".mats") {
                on_disk.insert(format!("{sub}{name}"));
            }
        }
    }
    let listed: BTreeSet<String> = unique.iter().map(|s| s.to_string()).collect();
    assert_eq!(listed, on_disk);
}

#[test]
fn pairs_cross_reference() {
    let manifest = Manifest::load().unwrap();
    for entry in &manifest.entries {
        if let Some(pair) = &entry.pair {
            let other = manifest.get(pair).unwrap_or_else(|| panic!("{pair} missing"));
            assert_eq!(other.pair.as_deref(), Some(entry.file.as_str()));
        }
    }
}

#[test]
fn at_least_ten_mutations() {
    let manifest = Manifest::load().unwrap();
    let n = manifest.entries.iter().filter(|e| e.expected == Expected::Reject).count();
    assert!(n >= 10);
}
