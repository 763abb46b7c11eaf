//! End-to-end acceptance checks. Every test prints one `PASS`/`FAIL` line
//! (run with `--nocapture` to see them) and fails when its check fails.

mod common;

use std::time::{Duration, Instant};

use cloth_grasp::corpus::{validate_task, Corpus, ExceptionKind};
use cloth_grasp::notation::parse_hand_load;
use cloth_grasp::planner::{find_plan, task_feasible, validate_plan, CostWeights, EnvContext};
use cloth_grasp::stats::{grasp_instance_tally, paper_totals, primitive_tally, task_distribution};
use cloth_grasp::PlanError;
use cloth_grasp::{classify_transition, enumerate_grasps, explain_transition, parse_grasp, print_grasp};
use common::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(name: &str, result: Result<String, String>) {
    match result {
        Ok(detail) => println!("PASS {name}: {detail}"),
        Err(why) => {
            println!("FAIL {name}: {why}");
            panic!("{name}: {why}");
        }
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

#[test]
fn grasp_instance_total() {
    let started = Instant::now();
    let t = grasp_instance_tally(&Corpus::reference());
    let r = check(t.total == 63, || format!("total {} != 63", t.total))
        .and_then(|_| check(started.elapsed() < Duration::from_secs(1), || "slower than 1 s".into()))
        .map(|_| format!("total={}", t.total));
    report("grasp-instance tally total = 63", r);
}

#[test]
fn primitive_totals() {
    let started = Instant::now();
    let t = primitive_tally(&Corpus::reference());
    let line = t.summary_line();
    let r = check(line == "Ex=10 G=13 R=12 RG=12 GM=11 S=4 total=62", || format!("got {line}"))
        .and_then(|_| check(started.elapsed() < Duration::from_secs(1), || "slower than 1 s".into()))
        .map(|_| line.clone());
    report("primitive tally per type and total 62", r);
}

#[test]
fn task_distribution_counts() {
    let started = Instant::now();
    let t = task_distribution(&Corpus::reference());
    let expected = [("1a", 6), ("1b", 1), ("1c", 3), ("2", 8), ("4", 5), ("8", 5)];
    let wrong: Vec<String> = expected
        .iter()
        .filter(|(k, n)| t.get(k) != *n)
        .map(|(k, n)| format!("task {k}: {} != {n}", t.get(k)))
        .collect();
    let r = check(wrong.is_empty(), || wrong.join("; "))
        .and_then(|_| check(started.elapsed() < Duration::from_secs(1), || "slower than 1 s".into()))
        .map(|_| expected.iter().map(|(k, n)| format!("{k}={n}")).collect::<Vec<_>>().join(" "));
    report("task distribution counts", r);
}

#[test]
fn paper_totals_match_printed_row() {
    let c = Corpus::reference();
    let t = paper_totals(&c);
    let wrong: Vec<String> = c
        .distribution
        .papers
        .iter()
        .filter(|p| t.get(&p.key) != p.tt)
        .map(|p| format!("{}: counted {} vs printed {}", p.key, t.get(&p.key), p.tt))
        .collect();
    let r = check(wrong.is_empty(), || wrong.join("; ")).map(|_| format!("{} papers", c.distribution.papers.len()));
    report("per-paper totals reproduce the printed total row", r);
}

#[test]
fn classifier_agrees_with_corpus_labels() {
    let c = Corpus::reference();
    let mut mismatches = Vec::new();
    let mut undocumented = Vec::new();
    let mut steps = 0;
    for t in &c.tasks {
        for s in &t.steps {
            steps += 1;
            let got = classify_transition(&s.pre, &s.post, s.flags).map(|r| r.primitive);
            if got.as_ref().ok() != Some(&s.label) {
                let trace = explain_transition(&s.pre, &s.post, s.flags).unwrap_or_else(|e| e.to_string());
                let entry =
                    format!("task {} step {}: printed {} / {}", t.id, s.number, s.label, trace.replace('\n', "; "));
                if t.exception(ExceptionKind::Label, Some(&s.number)).is_none() {
                    undocumented.push(entry.clone());
                }
                mismatches.push(entry);
            }
        }
    }
    for m in &mismatches {
        println!("  exception {m}");
    }
    let r = check(undocumented.is_empty(), || format!("undocumented: {}", undocumented.join(" | ")))
        .and_then(|_| check(mismatches.len() <= 2, || format!("{} exceptions", mismatches.len())))
        .map(|_| format!("{steps} steps, {} documented exceptions", mismatches.len()));
    report("classifier matches printed labels with at most 2 exceptions", r);
}

#[test]
fn all_task_chains_are_valid() {
    let c = Corpus::reference();
    let errors: Vec<String> = c
        .tasks
        .iter()
        .flat_map(|t| validate_task(t).into_iter().filter(|d| d.is_error()).map(|d| d.to_string()))
        .collect();
    let r = check(c.tasks.len() == 20, || format!("{} tasks", c.tasks.len()))
        .and_then(|_| check(errors.is_empty(), || errors.join("; ")))
        .map(|_| "20 tasks, 0 errors".into());
    report("all task scripts validate without errors", r);
}

#[test]
fn notation_round_trip() {
    let all = enumerate_grasps(3, 3, 2).unwrap();
    let mut failures = Vec::new();
    for s in &all {
        let text = print_grasp(s);
        match parse_grasp(&text) {
            Ok(back) if &back == s => {}
            other => failures.push(format!("{text}: {other:?}")),
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let variants = 2000;
    for _ in 0..variants {
        let s = all.choose(&mut rng).unwrap();
        let text = variant(s, &mut rng);
        match parse_grasp(&text) {
            Ok(back) if print_grasp(&back) == print_grasp(s) => {}
            other => failures.push(format!("{text:?}: {other:?}")),
        }
    }
    let r = check(failures.is_empty(), || format!("{} failures, first {}", failures.len(), failures[0]))
        .map(|_| format!("{} enumerated states, {variants} variants", all.len()));
    report("notation round-trip", r);
}

#[test]
fn planner_matches_exhaustive_search() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut failures = Vec::new();
    for _ in 0..50 {
        let (profiles, env, w) = random_query(&mut rng);
        let pool = reachable_states(&g("Pie"), &profiles, &env);
        let from = pool.choose(&mut rng).unwrap().clone();
        let to = if rng.gen_bool(0.9) { pool.choose(&mut rng).unwrap().clone() } else { g("LL+Pe") };
        let expected = oracle_cost(&from, &to, &profiles, &env, &w);
        match (expected, find_plan(&from, &to, &profiles, &env, &w)) {
            (Some(c), Ok(p)) if (p.cost - c).abs() < 1e-9 => {}
            (None, Err(PlanError::NoPlanFound { .. })) => {}
            (e, got) => failures.push(format!("{from} -> {to}: oracle {e:?}, planner {:?}", got.map(|p| p.cost))),
        }
    }
    let elapsed = started.elapsed();
    let r = check(failures.is_empty(), || failures.join("; "))
        .and_then(|_| check(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}")))
        .map(|_| format!("50 queries in {:.2} s", elapsed.as_secs_f64()));
    report("planner cost equals exhaustive shortest path", r);
}

#[test]
fn planner_reproduces_task_skeletons() {
    let c = Corpus::reference();
    let u = c.gripper("u").unwrap().clone();
    let profiles = vec![u.clone(), u];
    let env = EnvContext::table();
    let w = CostWeights::default();
    let mut problems = Vec::new();
    let mut summary = Vec::new();
    for id in ["2", "4", "8", "9"] {
        let sk = skeleton(c.task(id).unwrap());
        let (start, goal) = (&sk.steps[0].pre, &sk.steps.last().unwrap().post);
        if let Err(e) = validate_plan(&sk, start, goal, &profiles, &env, &w) {
            problems.push(format!("task {id} skeleton: {e}"));
        }
        match find_plan(start, goal, &profiles, &env, &w) {
            Ok(p) if p.cost <= sk.cost => summary.push(format!("{id}:{}<={}", p.cost, sk.cost)),
            Ok(p) => problems.push(format!("task {id}: plan cost {} > {}", p.cost, sk.cost)),
            Err(e) => problems.push(format!("task {id}: {e}")),
        }
    }
    report(
        "planner reproduces task skeletons",
        check(problems.is_empty(), || problems.join("; ")).map(|_| summary.join(" ")),
    );
}

#[test]
fn feasibility_discriminates_line_grasps() {
    let c = Corpus::reference();
    let task = c.task("3a").unwrap();
    let env = EnvContext::table();
    let pp_only: Vec<_> = c.grippers.iter().filter(|g| g.capabilities == [parse_hand_load("PP").unwrap()]).collect();
    let mut problems = Vec::new();
    for g in &pp_only {
        let profiles = vec![(*g).clone(), (*g).clone()];
        if task_feasible(task, &profiles, &env).feasible {
            problems.push(format!("feasible with PP-only gripper {}", g.id));
        }
        let mut with_ll = (*g).clone();
        with_ll.capabilities.push(parse_hand_load("LL").unwrap());
        if !task_feasible(task, &[with_ll.clone(), with_ll], &env).feasible {
            problems.push(format!("infeasible with gripper {} plus LL", g.id));
        }
    }
    let r = check(!pp_only.is_empty(), || "no PP-only grippers".into())
        .and_then(|_| check(problems.is_empty(), || problems.join("; ")))
        .map(|_| format!("{} PP-only grippers checked", pp_only.len()));
    report("feasibility: fold in air needs LL", r);
}
