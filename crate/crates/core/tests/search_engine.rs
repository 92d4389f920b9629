use std::fs;

use ppiped::search::{
    resume, run, run_with, scan_x1, Checkpoint, Event, FunnelStats, SearchConfig,
};
use ppiped::{enumerate_range, CandidateTriple, Error};

fn config(max_edge: u32, workers: usize) -> SearchConfig {
    let mut c = SearchConfig::new(max_edge);
    c.workers = workers;
    c
}

#[test]
fn finds_271_certificate() {
    let out = run(&config(271, 2)).unwrap();
    let c = out
        .certificates
        .iter()
        .find(|c| c.edges == [271, 106, 103])
        .expect("271 certificate");
    assert_eq!(c.minor_diagonals, [255, 266, 101]);
    assert_eq!(c.major_diagonals, [323, 312, 183]);
    assert_eq!(c.body_diagonals, [272, 278, 300, 374]);
    assert!(out.stats.realizable >= 1);
}

#[test]
fn output_independent_of_worker_count() {
    let one = run(&config(200, 1)).unwrap();
    for w in [2, 3, 8] {
        assert_eq!(run(&config(200, w)).unwrap(), one, "workers = {w}");
    }
}

#[test]
fn x1_results_merge_in_any_order() {
    let index = enumerate_range(130, 1).unwrap();
    let forward: Vec<_> = (1..=130)
        .map(|x1| scan_x1(&index, x1, false).unwrap())
        .collect();
    let mut reversed: Vec<_> = (1..=130)
        .rev()
        .map(|x1| scan_x1(&index, x1, false).unwrap())
        .collect();
    reversed.reverse();
    assert_eq!(forward, reversed);

    let mut a = FunnelStats::default();
    let mut b = FunnelStats::default();
    forward.iter().for_each(|r| a += r.stats);
    forward.iter().rev().for_each(|r| b += r.stats);
    assert_eq!(a, b);
    assert_eq!(a, run(&config(130, 1)).unwrap().stats);
}

#[test]
fn min_edge_restricts_largest_edge() {
    let mut c = config(271, 1);
    c.min_edge = 200;
    let out = run(&c).unwrap();
    assert!(out.all_four.iter().all(|t| t.x1 >= 200));
    assert_eq!(out.certificates.len(), 1);
    let full = run(&config(271, 1)).unwrap();
    let tail: Vec<CandidateTriple> = full.all_four.into_iter().filter(|t| t.x1 >= 200).collect();
    assert_eq!(out.all_four, tail);
}

#[test]
fn primitive_only_filters_certificates() {
    let mut c = config(560, 1);
    c.min_edge = 540;
    let all = run(&c).unwrap();
    assert!(
        all.certificates.iter().any(|c| !c.primitive),
        "doubled 271 solid at 542"
    );
    c.primitive_only = true;
    let prim = run(&c).unwrap();
    assert!(prim.certificates.iter().all(|c| c.primitive));
    assert_eq!(prim.stats.realizable, prim.certificates.len() as u64);
    assert_eq!(prim.stats.pass_all4, all.stats.pass_all4);
}

#[test]
fn interrupted_then_resumed_equals_one_shot() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let one_shot = run(&config(271, 2)).unwrap();

    let mut c = config(271, 2);
    c.checkpoint_path = Some(path.clone());
    c.stop_after = Some(135);
    let partial = run(&c).unwrap();
    assert!(!partial.complete);
    let cp = Checkpoint::load(&path).unwrap();
    assert_eq!(cp.completed_x1.len(), 135);
    assert!(cp.stats.is_monotone());

    let resumed = resume(&path, 3).unwrap();
    assert!(resumed.complete);
    assert_eq!(resumed, one_shot);
}

#[test]
fn checkpoint_is_monotone_at_every_flush() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let mut c = config(150, 2);
    c.checkpoint_path = Some(path.clone());
    let mut flushes = 0;
    let mut previous = FunnelStats::default();
    run_with(&c, |event| {
        if let Event::Finished { stats, .. } = event {
            let cp = Checkpoint::load(&path)?;
            assert!(cp.stats.is_monotone());
            assert_eq!(&cp.stats, stats);
            assert!(cp.stats.configs_tested >= previous.configs_tested);
            previous = cp.stats;
            flushes += 1;
        }
        Ok(())
    })
    .unwrap();
    assert_eq!(flushes, 150);
}

#[test]
fn resume_with_mismatched_bounds_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let mut c = config(100, 1);
    c.checkpoint_path = Some(path.clone());
    c.stop_after = Some(10);
    run(&c).unwrap();

    let mut other = config(120, 1);
    other.checkpoint_path = Some(path.clone());
    other.resume = true;
    assert!(matches!(run(&other), Err(Error::CheckpointMismatch { .. })));
    other.max_edge = 100;
    other.primitive_only = true;
    assert!(matches!(run(&other), Err(Error::CheckpointMismatch { .. })));
}

#[test]
fn resuming_a_finished_run_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let mut c = config(120, 1);
    c.checkpoint_path = Some(path.clone());
    let first = run(&c).unwrap();
    let before = fs::read(&path).unwrap();

    c.resume = true;
    let mut finished = 0;
    let again = run_with(&c, |e| {
        if let Event::Finished { .. } = e {
            finished += 1;
        }
        Ok(())
    })
    .unwrap();
    assert_eq!(finished, 0);
    assert_eq!(again, first);
    assert_eq!(fs::read(&path).unwrap(), before);
}

#[test]
fn corrupt_checkpoint_fails_loudly() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let mut c = config(120, 1);
    c.checkpoint_path = Some(path.clone());
    c.stop_after = Some(5);
    run(&c).unwrap();
    c.stop_after = None;
    c.resume = true;

    let good = fs::read_to_string(&path).unwrap();
    fs::write(&path, &good[..good.len() / 2]).unwrap();
    assert!(matches!(run(&c), Err(Error::CheckpointCorrupt { .. })));

    fs::write(&path, good.replace("\"version\":1", "\"version\":99")).unwrap();
    assert!(matches!(run(&c), Err(Error::CheckpointCorrupt { .. })));

    fs::write(&path, good.replace("\"emitted\":0", "\"emitted\":4")).unwrap();
    assert!(matches!(run(&c), Err(Error::CheckpointCorrupt { .. })));

    fs::remove_file(&path).unwrap();
    assert!(matches!(run(&c), Err(Error::Io(_))));
}

#[test]
fn tampered_checkpoint_certificate_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.ckpt");
    let mut c = config(271, 1);
    c.min_edge = 271;
    c.checkpoint_path = Some(path.clone());
    run(&c).unwrap();
    let text = fs::read_to_string(&path).unwrap();
    assert!(text.contains("[272,278,300,374]"));
    fs::write(
        &path,
        text.replace("[272,278,300,374]", "[272,278,300,375]"),
    )
    .unwrap();
    assert!(matches!(
        Checkpoint::load(&path),
        Err(Error::CheckpointCorrupt { .. })
    ));
}
