use super::*;

fn verdict() -> Verdict {
    Verdict {
        oracle: "no-violation".into(),
        runtime_error: false,
        lazy: "no-violation".into(),
        eager: "speculative-violation".into(),
        eager_runtime_error: false,
        laziness_gap: true,
        status: Status::Agree,
    }
}

#[test]
fn sidecar_sits_next_to_program() {
    assert_eq!(sidecar(Path::new("c/flag.pp")), PathBuf::from("c/flag.expect.json"));
}

#[test]
fn expectation_round_trips_through_json() {
    let exp = Expectation {
        max_threads: 2,
        rounds: [(1, verdict()), (3, verdict())].into_iter().collect(),
    };
    let text = serde_json::to_string_pretty(&exp).unwrap();
    assert!(text.contains("\"3\""), "rounds are keyed by k: {text}");
    assert_eq!(serde_json::from_str::<Expectation>(&text).unwrap(), exp);
}

#[test]
fn explicit_dir_wins_over_default() {
    assert_eq!(root(Some("x".into())), PathBuf::from("x"));
}

#[test]
fn programs_are_sorted_and_filtered() {
    let dir = tempfile::tempdir().unwrap();
    for f in ["b.pp", "a.pp", "a.expect.json", "notes.txt"] {
        std::fs::write(dir.path().join(f), "").unwrap();
    }
    let names: Vec<String> = programs(dir.path())
        .unwrap()
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["a.pp", "b.pp"]);
}
