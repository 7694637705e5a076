//! C ABI over `goalnav`.
//!
//! Objects are opaque handles created by `gn_*_new` / `gn_episode_*` and
//! released with the matching `gn_*_free`. Every fallible call returns a
//! [`GnStatus`]; on failure [`gn_last_error`] describes the problem for the
//! calling thread. Configuration crosses the boundary as the same TOML the
//! command line tool reads, so `NULL` means defaults.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use goalnav::harness::{agent_config_for, run_episode, run_suite, RunConfig};
use goalnav::metrics::{EpisodeResult, Summary};
use goalnav::policy::AgentState;
use goalnav::sim::{generate_episode, load_episode, save_episode, Action, EpisodeSpec, EpisodeStatus, Pose, Simulator};
use goalnav::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    ContractViolation = 3,
    Config = 4,
    Io = 5,
    Parse = 6,
    Generation = 7,
    Unreachable = 8,
    GeometryMismatch = 9,
    Utf8 = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnAction {
    MoveForward = 0,
    TurnLeft = 1,
    TurnRight = 2,
    Found = 3,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GnEpisodeStatus {
    Ongoing = 0,
    Success = 1,
    FailWrongFound = 2,
    FailTimeout = 3,
}

/// World-frame pose; `theta` in radians, 0 faces +y, counter-clockwise.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GnPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GnStepResult {
    pub pose: GnPose,
    pub collided: bool,
    pub goals_found: u32,
    pub status: GnEpisodeStatus,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct GnMetrics {
    pub success: f64,
    pub progress: f64,
    pub spl: f64,
    pub ppl: f64,
    /// Steps for one episode, episode count for a suite.
    pub count: u64,
}

/// A generated or loaded episode.
pub struct GnEpisode(EpisodeSpec);

/// A running simulator.
pub struct GnSim(Simulator);

/// The navigation agent of one episode.
pub struct GnAgent(AgentState);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(GnStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::ContractViolation(_) => GnStatus::ContractViolation,
            Error::InvalidInput(_) => GnStatus::InvalidInput,
            Error::Generation(_) => GnStatus::Generation,
            Error::Unreachable => GnStatus::Unreachable,
            Error::GeometryMismatch(_) => GnStatus::GeometryMismatch,
            Error::Config(_) => GnStatus::Config,
            Error::Parse { .. } => GnStatus::Parse,
            Error::Io { .. } => GnStatus::Io,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(GnStatus::NullPointer, format!("{what} is NULL"))
}

/// Runs `f`, converting errors and panics into a status plus the thread's
/// last error message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> GnStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => GnStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            GnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(GnStatus::Utf8, format!("{what}: {e}")))
}

unsafe fn config_arg(p: *const c_char) -> Result<RunConfig, Failure> {
    if p.is_null() {
        Ok(RunConfig::default())
    } else {
        Ok(RunConfig::from_toml(str_arg(p, "config")?)?)
    }
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

fn pose_out(p: Pose) -> GnPose {
    GnPose {
        x: p.x,
        y: p.y,
        theta: p.theta,
    }
}

fn action_in(a: GnAction) -> Action {
    match a {
        GnAction::MoveForward => Action::MoveForward,
        GnAction::TurnLeft => Action::TurnLeft,
        GnAction::TurnRight => Action::TurnRight,
        GnAction::Found => Action::Found,
    }
}

fn action_out(a: Action) -> GnAction {
    match a {
        Action::MoveForward => GnAction::MoveForward,
        Action::TurnLeft => GnAction::TurnLeft,
        Action::TurnRight => GnAction::TurnRight,
        Action::Found => GnAction::Found,
    }
}

fn status_out(s: EpisodeStatus) -> GnEpisodeStatus {
    match s {
        EpisodeStatus::Ongoing => GnEpisodeStatus::Ongoing,
        EpisodeStatus::Success => GnEpisodeStatus::Success,
        EpisodeStatus::FailWrongFound => GnEpisodeStatus::FailWrongFound,
        EpisodeStatus::FailTimeout => GnEpisodeStatus::FailTimeout,
    }
}

fn episode_metrics(r: &EpisodeResult) -> GnMetrics {
    GnMetrics {
        success: r.success,
        progress: r.progress,
        spl: r.spl,
        ppl: r.ppl,
        count: r.steps as u64,
    }
}

fn suite_metrics(s: &Summary) -> GnMetrics {
    GnMetrics {
        success: s.success,
        progress: s.progress,
        spl: s.spl,
        ppl: s.ppl,
        count: s.episodes as u64,
    }
}

/// Message of the calling thread's most recent failure, or NULL. The string
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn gn_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Generates the episode for `seed` from the `[world]` section of
/// `config_toml` (NULL for defaults).
///
/// # Safety
/// `config_toml` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_episode_generate(
    seed: u64,
    config_toml: *const c_char,
    out: *mut *mut GnEpisode,
) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = config_arg(config_toml)?;
        let spec = generate_episode(seed, &cfg.world)?;
        *out = Box::into_raw(Box::new(GnEpisode(spec)));
        Ok(())
    })
}

/// Loads an episode from its `.episode.toml` sidecar.
///
/// # Safety
/// `path` is a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_episode_load(path: *const c_char, out: *mut *mut GnEpisode) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = load_episode(&PathBuf::from(str_arg(path, "path")?))?;
        *out = Box::into_raw(Box::new(GnEpisode(spec)));
        Ok(())
    })
}

/// Writes `<dir>/<stem>.world` and `<dir>/<stem>.episode.toml`.
///
/// # Safety
/// `episode` is a live handle; `dir` and `stem` are NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn gn_episode_save(
    episode: *const GnEpisode,
    dir: *const c_char,
    stem: *const c_char,
) -> GnStatus {
    guard(|| {
        let ep = ref_arg(episode, "episode")?;
        save_episode(&ep.0, &PathBuf::from(str_arg(dir, "dir")?), str_arg(stem, "stem")?)?;
        Ok(())
    })
}

/// Number of goals in the episode.
///
/// # Safety
/// `episode` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_episode_goal_count(episode: *const GnEpisode, out: *mut u32) -> GnStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(episode, "episode")?.0.goal_sequence.len() as u32;
        Ok(())
    })
}

/// # Safety
/// `episode` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gn_episode_free(episode: *mut GnEpisode) {
    if !episode.is_null() {
        drop(Box::from_raw(episode));
    }
}

/// Starts a simulator at the episode's start pose.
///
/// # Safety
/// `episode` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_sim_new(episode: *const GnEpisode, out: *mut *mut GnSim) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sim = Simulator::new(ref_arg(episode, "episode")?.0.clone())?;
        *out = Box::into_raw(Box::new(GnSim(sim)));
        Ok(())
    })
}

/// Applies one action. Stepping a finished episode is a contract violation.
///
/// # Safety
/// `sim` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_sim_step(sim: *mut GnSim, action: GnAction, out: *mut GnStepResult) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sim = &mut out_arg(sim, "sim")?.0;
        let step = sim.step(action_in(action))?;
        *out = GnStepResult {
            pose: pose_out(sim.pose()),
            collided: step.collided,
            goals_found: step.goals_found as u32,
            status: status_out(step.episode_status),
        };
        Ok(())
    })
}

/// # Safety
/// `sim` is a live handle; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_sim_pose(sim: *const GnSim, out: *mut GnPose) -> GnStatus {
    guard(|| {
        *out_arg(out, "out")? = pose_out(ref_arg(sim, "sim")?.0.pose());
        Ok(())
    })
}

/// # Safety
/// `sim` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gn_sim_free(sim: *mut GnSim) {
    if !sim.is_null() {
        drop(Box::from_raw(sim));
    }
}

/// Creates an agent for the episode from the `[agent]` section of
/// `config_toml` (NULL for defaults).
///
/// # Safety
/// `episode` is a live handle; `config_toml` is NULL or a NUL-terminated
/// string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_agent_new(
    episode: *const GnEpisode,
    config_toml: *const c_char,
    out: *mut *mut GnAgent,
) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = &ref_arg(episode, "episode")?.0;
        let cfg = config_arg(config_toml)?;
        let agent = AgentState::new(
            agent_config_for(spec, &cfg.agent),
            spec.start,
            spec.goal_sequence.clone(),
            spec.palette.clone(),
            spec.sim.camera,
            spec.sim.turn_angle,
        )?;
        *out = Box::into_raw(Box::new(GnAgent(agent)));
        Ok(())
    })
}

/// Chooses the next action from the simulator's current observation.
///
/// # Safety
/// `agent` and `sim` are live handles; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_agent_decide(agent: *mut GnAgent, sim: *const GnSim, out: *mut GnAction) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let sim = &ref_arg(sim, "sim")?.0;
        let agent = &mut out_arg(agent, "agent")?.0;
        *out = action_out(agent.decide(sim.observation())?.action);
        Ok(())
    })
}

/// Feeds the outcome of the last step back to the agent: the pose before
/// the step and what the simulator reported.
///
/// # Safety
/// `agent` is a live handle.
#[no_mangle]
pub unsafe extern "C" fn gn_agent_acknowledge(
    agent: *mut GnAgent,
    before: GnPose,
    collided: bool,
    goals_found: u32,
) -> GnStatus {
    guard(|| {
        let agent = &mut out_arg(agent, "agent")?.0;
        agent.acknowledge(
            Pose::new(before.x, before.y, before.theta),
            collided,
            goals_found as usize,
        );
        Ok(())
    })
}

/// # Safety
/// `agent` is NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gn_agent_free(agent: *mut GnAgent) {
    if !agent.is_null() {
        drop(Box::from_raw(agent));
    }
}

/// Runs a whole episode with the agent from `config_toml` (NULL for
/// defaults). `out->count` is the number of steps.
///
/// # Safety
/// `episode` is a live handle; `config_toml` is NULL or a NUL-terminated
/// string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_run_episode(
    episode: *const GnEpisode,
    config_toml: *const c_char,
    out: *mut GnMetrics,
) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let spec = &ref_arg(episode, "episode")?.0;
        let cfg = config_arg(config_toml)?;
        let (result, _) = run_episode(spec, &cfg.agent)?;
        *out = episode_metrics(&result);
        Ok(())
    })
}

/// Runs the suite described by `config_toml` (NULL for defaults), writing
/// its outputs like the command line tool. `out->count` is the number of
/// episodes.
///
/// # Safety
/// `config_toml` is NULL or a NUL-terminated string; `out` is writable.
#[no_mangle]
pub unsafe extern "C" fn gn_run_suite(config_toml: *const c_char, out: *mut GnMetrics) -> GnStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        let cfg = config_arg(config_toml)?;
        *out = suite_metrics(&run_suite(&cfg)?.summary);
        Ok(())
    })
}
