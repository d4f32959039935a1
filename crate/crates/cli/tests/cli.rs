//! End-to-end tests that drive the compiled binary the way a user would.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_shapfacts"))
}

fn data(file: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(file)
}

fn run(configure: impl FnOnce(&mut Command)) -> Output {
    let mut cmd = bin();
    configure(&mut cmd);
    cmd.output().expect("the binary should at least start")
}

/// Runs the binary, asserts success, and returns stdout.
fn stdout(configure: impl FnOnce(&mut Command)) -> String {
    let out = run(configure);
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("stdout should be utf-8")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("no signal expected")
}

#[test]
fn exact_recovers_the_flight_example_values() {
    for file in ["flights.dnf", "flights_endogenous.dnf"] {
        let csv = stdout(|c| {
            c.arg("exact").arg("--in").arg(data(file));
        });
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(
            lines[0],
            "fact_id,label,value_num,value_den,value_float,rank"
        );
        assert!(lines[1].starts_with("1,\"Flights(JFK,CDG)\",43,105,"), "{csv}");
        assert!(lines[2].starts_with("2,\"Flights(EWR,LHR)\",23,210,"), "{csv}");
        assert!(lines[6].starts_with("6,\"Flights(LAX,MUC)\",8,105,"), "{csv}");
        assert_eq!(lines[8], "8,\"Flights(LHR,MUC)\",0,1,0,8", "{csv}");
    }
}

#[test]
fn pqe_report_matches_the_compiled_exact_report_byte_for_byte() {
    let exact = stdout(|c| {
        c.arg("exact").arg("--in").arg(data("flights.dnf"));
    });
    let pqe = stdout(|c| {
        c.arg("pqe").arg("--in").arg(data("flights.dnf"));
    });
    assert_eq!(exact, pqe);
}

#[test]
fn pqe_evaluates_probability_maps_and_writes_slice_counts() {
    let line = stdout(|c| {
        c.arg("pqe")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--probabilities")
            .arg(data("probabilities.txt"));
    });
    assert_eq!(line, "probability 107/128 (0.8359375)\n");

    let dir = tempfile::tempdir().unwrap();
    let slices_path = dir.path().join("slices.json");
    stdout(|c| {
        c.arg("pqe")
            .arg("--in")
            .arg(data("flights_endogenous.dnf"))
            .arg("--slices-out")
            .arg(&slices_path);
    });
    let slices: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&slices_path).unwrap()).unwrap();
    assert_eq!(slices["universe_size"], 8);
    let counts: Vec<&str> = slices["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c.as_str().unwrap())
        .collect();
    assert_eq!(counts, ["0", "1", "12", "42", "66", "56", "28", "8", "1"]);
}

#[test]
fn proxy_scores_follow_the_clause_structure() {
    let csv = stdout(|c| {
        c.arg("proxy").arg("--in").arg(data("flights_no_direct.dnf"));
    });
    for fact in [2, 3, 4, 5] {
        assert!(
            csv.lines().any(|l| l.starts_with(&format!("{fact},")) && l.contains(",1,33,")),
            "fact {fact} should score 1/33 in:\n{csv}"
        );
    }
    for fact in [6, 7] {
        assert!(
            csv.lines().any(|l| l.starts_with(&format!("{fact},")) && l.contains(",1,66,")),
            "fact {fact} should score 1/66 in:\n{csv}"
        );
    }

    // The fact with a singleton monomial scores zero under the clause proxy.
    let csv = stdout(|c| {
        c.arg("proxy").arg("--in").arg(data("flights_endogenous.dnf"));
    });
    assert!(
        csv.lines().nth(1).unwrap().starts_with("1,\"Flights(JFK,CDG)\",0,1,0,"),
        "{csv}"
    );
}

#[test]
fn circuit_inputs_share_the_game_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tiny.json");
    fs::write(
        &path,
        r#"{
  "facts": [
    {"id": 1, "kind": "endo", "label": "a"},
    {"id": 2, "kind": "endo", "label": "b"},
    {"id": 3, "kind": "exo", "label": "u"}
  ],
  "gates": [
    {"id": 0, "kind": "var", "fact": 1},
    {"id": 1, "kind": "var", "fact": 3},
    {"id": 2, "kind": "and", "inputs": [0, 1]},
    {"id": 3, "kind": "var", "fact": 2},
    {"id": 4, "kind": "and", "inputs": [3, 1]},
    {"id": 5, "kind": "or", "inputs": [2, 4]}
  ],
  "output": 5
}"#,
    )
    .unwrap();

    let exact = stdout(|c| {
        c.arg("exact").arg("--in").arg(&path);
    });
    let brute = stdout(|c| {
        c.arg("brute").arg("--in").arg(&path);
    });
    assert_eq!(exact, brute);
    assert!(exact.contains("1,a,1,2,0.5,1"), "{exact}");
    assert!(exact.contains("2,b,1,2,0.5,2"), "{exact}");
}

#[test]
fn sampled_reports_are_reproducible_per_seed() {
    for method in ["mc", "kshap"] {
        let run_with_seed = |seed: &str| {
            stdout(|c| {
                c.arg(method)
                    .arg("--in")
                    .arg(data("flights.dnf"))
                    .arg("--samples-per-fact")
                    .arg("40")
                    .arg("--seed")
                    .arg(seed);
            })
        };
        let first = run_with_seed("11");
        let second = run_with_seed("11");
        let other = run_with_seed("12");
        assert_eq!(first, second, "{method} must be deterministic per seed");
        assert_ne!(first, other, "{method} must react to the seed");
    }
}

#[test]
fn reports_are_identical_across_runs_modulo_the_meta_block() {
    let csv_once = stdout(|c| {
        c.arg("exact").arg("--in").arg(data("flights.dnf"));
    });
    let csv_twice = stdout(|c| {
        c.arg("exact").arg("--in").arg(data("flights.dnf"));
    });
    assert_eq!(csv_once, csv_twice);

    let json_run = || {
        stdout(|c| {
            c.arg("exact")
                .arg("--in")
                .arg(data("flights.dnf"))
                .arg("--report")
                .arg("json");
        })
    };
    let mut first: serde_json::Value = serde_json::from_str(&json_run()).unwrap();
    let mut second: serde_json::Value = serde_json::from_str(&json_run()).unwrap();
    assert_eq!(first["method"], "exact-ddnnf");
    assert!(first["meta"]["generated_at"].is_u64());
    assert!(first["meta"]["wall_ms"].is_u64());
    first.as_object_mut().unwrap().remove("meta");
    second.as_object_mut().unwrap().remove("meta");
    assert_eq!(first, second);
}

#[test]
fn compile_emits_artifacts_that_feed_back_into_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let summary = stdout(|c| {
        c.arg("compile")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--emit-dir")
            .arg(dir.path());
    });
    assert!(summary.contains("encoding:"), "{summary}");
    assert!(summary.contains("purged:"), "{summary}");
    for file in ["encoding.cnf", "compiled.nnf", "purged.nnf"] {
        assert!(dir.path().join(file).exists(), "missing {file}");
    }

    let from_dnf = stdout(|c| {
        c.arg("exact").arg("--in").arg(data("flights.dnf"));
    });
    for nnf in ["compiled.nnf", "purged.nnf"] {
        let from_artifacts = stdout(|c| {
            c.arg("exact")
                .arg("--in")
                .arg(dir.path().join("encoding.cnf"))
                .arg("--nnf")
                .arg(dir.path().join(nnf));
        });
        assert_eq!(from_dnf, from_artifacts, "via {nnf}");
    }

    // The DIMACS file alone also works: it is recompiled from scratch.
    let recompiled = stdout(|c| {
        c.arg("exact").arg("--in").arg(dir.path().join("encoding.cnf"));
    });
    assert_eq!(from_dnf, recompiled);
}

#[test]
fn budget_trips_exit_with_status_two() {
    let timed_out = run(|c| {
        c.arg("exact")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--timeout")
            .arg("0");
    });
    assert_eq!(exit_code(&timed_out), 2);
    assert!(
        String::from_utf8_lossy(&timed_out.stderr).contains("deadline"),
        "stderr: {}",
        String::from_utf8_lossy(&timed_out.stderr)
    );

    let out_of_nodes = run(|c| {
        c.arg("compile")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--node-budget")
            .arg("1");
    });
    assert_eq!(exit_code(&out_of_nodes), 2);

    let no_fallback = run(|c| {
        c.arg("hybrid")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--timeout")
            .arg("0")
            .arg("--no-fallback");
    });
    assert_eq!(exit_code(&no_fallback), 2);
}

#[test]
fn hybrid_falls_back_to_clause_scores_only_on_budget_trips() {
    let fallback: serde_json::Value = serde_json::from_str(&stdout(|c| {
        c.arg("hybrid")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--timeout")
            .arg("0")
            .arg("--report")
            .arg("json");
    }))
    .unwrap();
    assert_eq!(fallback["method"], "proxy");
    assert_eq!(fallback["fallback_reason"], "deadline exceeded");

    let exact: serde_json::Value = serde_json::from_str(&stdout(|c| {
        c.arg("hybrid")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--report")
            .arg("json");
    }))
    .unwrap();
    assert_eq!(exact["method"], "exact-ddnnf");
    assert!(exact["fallback_reason"].is_null());

    // The environment variable supplies the default budget.
    let via_env: serde_json::Value = serde_json::from_str(&stdout(|c| {
        c.arg("hybrid")
            .arg("--in")
            .arg(data("flights.dnf"))
            .arg("--report")
            .arg("json")
            .env("SHAPFACTS_TIMEOUT_MS", "0");
    }))
    .unwrap();
    assert_eq!(via_env["method"], "proxy");
}

#[test]
fn input_errors_exit_with_status_one_and_name_the_file() {
    let missing = run(|c| {
        c.arg("exact").arg("--in").arg("no_such_file.dnf");
    });
    assert_eq!(exit_code(&missing), 1);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no_such_file.dnf"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.dnf");
    fs::write(&bad, "facts 1\n1 endo A\nmonomials 1\nxyz\n").unwrap();
    let malformed = run(|c| {
        c.arg("exact").arg("--in").arg(&bad);
    });
    assert_eq!(exit_code(&malformed), 1);
    let stderr = String::from_utf8_lossy(&malformed.stderr).to_string();
    assert!(stderr.contains("bad.dnf"), "{stderr}");
    assert!(stderr.contains("line 4"), "{stderr}");

    let usage = run(|c| {
        c.arg("exact").arg("--frobnicate");
    });
    assert_eq!(exit_code(&usage), 1);

    let help = run(|c| {
        c.arg("--help");
    });
    assert_eq!(exit_code(&help), 0);
}

#[test]
fn bench_writes_one_csv_row_per_instance_and_method() {
    let csv = stdout(|c| {
        c.arg("bench")
            .arg("--corpus")
            .arg(data(""))
            .arg("--methods")
            .arg("proxy,mc")
            .arg("--samples-per-fact")
            .arg("5");
    });
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "instance,method,wall_ms,ndcg,p_at_1,p_at_3,p_at_5,p_at_10,l1,l2"
    );
    assert_eq!(lines.len(), 1 + 3 * 2, "{csv}");
    let expected = [
        ("flights", "proxy"),
        ("flights", "mc"),
        ("flights_endogenous", "proxy"),
        ("flights_endogenous", "mc"),
        ("flights_no_direct", "proxy"),
        ("flights_no_direct", "mc"),
    ];
    for (line, (instance, method)) in lines[1..].iter().zip(expected) {
        assert!(
            line.starts_with(&format!("{instance},{method},")),
            "expected {instance},{method} in `{line}`"
        );
        let ndcg: f64 = line.split(',').nth(3).unwrap().parse().unwrap();
        assert!((0.0..=1.0).contains(&ndcg), "{line}");
        // Eight facts per instance, so p@10 stays blank.
        assert_eq!(line.split(',').nth(7).unwrap(), "", "{line}");
    }
}

#[test]
fn metrics_compares_two_saved_reports() {
    let dir = tempfile::tempdir().unwrap();
    let truth = dir.path().join("truth.json");
    let estimate = dir.path().join("estimate.json");
    stdout(|c| {
        c.arg("exact")
            .arg("--in")
            .arg(data("flights_no_direct.dnf"))
            .arg("--report")
            .arg("json")
            .arg("--out")
            .arg(&truth);
    });
    stdout(|c| {
        c.arg("proxy")
            .arg("--in")
            .arg(data("flights_no_direct.dnf"))
            .arg("--report")
            .arg("json")
            .arg("--out")
            .arg(&estimate);
    });
    let block = stdout(|c| {
        c.arg("metrics")
            .arg("--truth")
            .arg(&truth)
            .arg("--estimate")
            .arg(&estimate);
    });
    let lines: Vec<&str> = block.lines().collect();
    assert_eq!(lines[0], "ndcg 1");
    assert!(lines.contains(&"p@1 1"), "{block}");
    assert!(lines.contains(&"l1 7/66 (0.10606060606060606)"), "{block}");
    assert!(
        lines.iter().any(|l| l.starts_with("l2 13243/871200 (")),
        "{block}"
    );
}

#[test]
fn thread_count_override_is_validated() {
    let bad = run(|c| {
        c.arg("exact")
            .arg("--in")
            .arg(data("flights.dnf"))
            .env("SHAPFACTS_THREADS", "abc");
    });
    assert_eq!(exit_code(&bad), 1);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("SHAPFACTS_THREADS"));

    let good = stdout(|c| {
        c.arg("exact")
            .arg("--in")
            .arg(data("flights.dnf"))
            .env("SHAPFACTS_THREADS", "2");
    });
    assert!(good.contains("43,105"));
}
