use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use goalnav::harness::run_episode;
use goalnav::policy::AgentConfig;
use goalnav::sim::{generate_episode, GenerationParams};
use goalnav_ffi::*;

fn last_error() -> String {
    let p = gn_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn episode(seed: u64) -> *mut GnEpisode {
    let mut ep = ptr::null_mut();
    assert_eq!(unsafe { gn_episode_generate(seed, ptr::null(), &mut ep) }, GnStatus::Ok);
    ep
}

/// Drives an episode through the handles; returns (steps, status, goals).
fn drive(ep: *const GnEpisode) -> (u64, GnEpisodeStatus, u32) {
    unsafe {
        let mut sim = ptr::null_mut();
        let mut agent = ptr::null_mut();
        assert_eq!(gn_sim_new(ep, &mut sim), GnStatus::Ok);
        assert_eq!(gn_agent_new(ep, ptr::null(), &mut agent), GnStatus::Ok);
        let mut steps = 0;
        let mut r;
        loop {
            let mut action = GnAction::Found;
            assert_eq!(gn_agent_decide(agent, sim, &mut action), GnStatus::Ok);
            let mut before = GnPose::default();
            assert_eq!(gn_sim_pose(sim, &mut before), GnStatus::Ok);
            r = GnStepResult {
                pose: before,
                collided: false,
                goals_found: 0,
                status: GnEpisodeStatus::Ongoing,
            };
            assert_eq!(gn_sim_step(sim, action, &mut r), GnStatus::Ok);
            assert_eq!(
                gn_agent_acknowledge(agent, before, r.collided, r.goals_found),
                GnStatus::Ok
            );
            steps += 1;
            if r.status != GnEpisodeStatus::Ongoing {
                break;
            }
        }
        assert_eq!(
            gn_sim_step(sim, GnAction::TurnLeft, &mut r),
            GnStatus::ContractViolation
        );
        assert!(last_error().contains("after episode ended"));
        gn_agent_free(agent);
        gn_sim_free(sim);
        (steps, r.status, r.goals_found)
    }
}

#[test]
fn handle_loop_matches_the_core_runner() {
    let ep = episode(4);
    let (steps, status, goals) = drive(ep);
    let spec = generate_episode(4, &GenerationParams::default()).unwrap();
    let (result, log) = run_episode(&spec, &AgentConfig::default()).unwrap();
    assert_eq!(steps as usize, result.steps);
    assert_eq!(goals as usize, log.records.last().unwrap().goals_found);
    assert_eq!(status == GnEpisodeStatus::Success, result.success == 1.0);

    let mut m = GnMetrics::default();
    assert_eq!(unsafe { gn_run_episode(ep, ptr::null(), &mut m) }, GnStatus::Ok);
    assert_eq!(
        (m.success, m.progress, m.spl, m.ppl, m.count),
        (
            result.success,
            result.progress,
            result.spl,
            result.ppl,
            result.steps as u64
        )
    );
    let mut k = 0;
    assert_eq!(unsafe { gn_episode_goal_count(ep, &mut k) }, GnStatus::Ok);
    assert_eq!(k as usize, spec.goal_sequence.len());
    unsafe { gn_episode_free(ep) };
}

#[test]
fn null_and_bad_arguments_report_errors() {
    unsafe {
        let mut ep = ptr::null_mut();
        assert_eq!(
            gn_episode_generate(1, ptr::null(), ptr::null_mut()),
            GnStatus::NullPointer
        );
        assert!(last_error().contains("out"));
        let bad = CString::new("[agent]\nmap_size = 1\n").unwrap();
        assert_eq!(gn_episode_generate(1, bad.as_ptr(), &mut ep), GnStatus::Config);
        assert!(ep.is_null());
        let junk = CString::new("not toml [").unwrap();
        assert_eq!(gn_episode_generate(1, junk.as_ptr(), &mut ep), GnStatus::Config);
        let mut sim = ptr::null_mut();
        assert_eq!(gn_sim_new(ptr::null(), &mut sim), GnStatus::NullPointer);
        let missing = CString::new("/nonexistent/ep.episode.toml").unwrap();
        assert_eq!(gn_episode_load(missing.as_ptr(), &mut ep), GnStatus::Io);
        let invalid = [0xffu8, 0];
        assert_eq!(gn_episode_load(invalid.as_ptr().cast(), &mut ep), GnStatus::Utf8);
        gn_episode_free(ptr::null_mut());
        gn_sim_free(ptr::null_mut());
        gn_agent_free(ptr::null_mut());
    }
}

#[test]
fn save_and_load_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let ep = episode(12);
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    let stem = CString::new("ep").unwrap();
    unsafe {
        assert_eq!(gn_episode_save(ep, d.as_ptr(), stem.as_ptr()), GnStatus::Ok);
        let side = CString::new(dir.path().join("ep.episode.toml").to_str().unwrap()).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(gn_episode_load(side.as_ptr(), &mut back), GnStatus::Ok);
        let (mut a, mut b) = (GnMetrics::default(), GnMetrics::default());
        let cfg = CString::new("[agent]\nloop_limit = 3\n").unwrap();
        assert_eq!(gn_run_episode(ep, cfg.as_ptr(), &mut a), GnStatus::Ok);
        assert_eq!(gn_run_episode(back, cfg.as_ptr(), &mut b), GnStatus::Ok);
        assert_eq!(a, b);
        gn_episode_free(back);
        gn_episode_free(ep);
    }
}

#[test]
fn suite_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = CString::new(format!(
        "episode_count = 1\nseed = 3\nout_dir = {:?}\n",
        dir.path().to_str().unwrap()
    ))
    .unwrap();
    let mut m = GnMetrics::default();
    assert_eq!(unsafe { gn_run_suite(cfg.as_ptr(), &mut m) }, GnStatus::Ok);
    assert_eq!(m.count, 1);
    assert!(dir.path().join("summary.txt").is_file());
    let v = unsafe { CStr::from_ptr(gn_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_the_api() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/goalnav.h")).unwrap();
    for name in [
        "gn_episode_generate",
        "gn_episode_load",
        "gn_episode_save",
        "gn_episode_free",
        "gn_sim_new",
        "gn_sim_step",
        "gn_agent_new",
        "gn_agent_decide",
        "gn_run_suite",
        "gn_last_error",
        "typedef struct GnEpisode GnEpisode;",
        "GN_STATUS_NULL_POINTER = 1",
    ] {
        assert!(header.contains(name), "{name} missing from header");
    }
}

#[test]
fn c_program_links_and_runs() {
    // tests run from target/<profile>/deps; the static library sits one level up.
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().unwrap().parent().unwrap();
    let lib = lib_dir.join("libgoalnav_ffi.a");
    assert!(lib.is_file(), "{} not built", lib.display());
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let dir = tempfile::tempdir().unwrap();
    let bin = dir.path().join("smoke");
    let compiled = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg("-o")
        .arg(&bin)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status();
    match compiled {
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            eprintln!("no C compiler on PATH, skipping");
            return;
        }
        status => assert!(status.unwrap().success()),
    }
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let (steps, status, goals) = drive(episode(4));
    let want = format!("{steps} {} {goals}\n", status as i32);
    assert_eq!(String::from_utf8_lossy(&out.stdout), want);
}
