//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Criteria 10 and 11 train several agents and take on the order of an hour
//! on one core. Set `RWCTL_ACCEPTANCE_QUICK=1` to skip them.

mod common;

use std::time::Instant;

use common::*;
use nalgebra::{DMatrix, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rwctl::agent::train::{eval_environment, evaluate, train, ActorPolicy};
use rwctl::agent::{her, td_target, AgentConfig, ReplayBuffer, Td3Agent};
use rwctl::attitude::AttitudeMRP;
use rwctl::baseline::PdController;
use rwctl::dynamics::{
    body_kinetic_energy, step, SpacecraftModel, SpacecraftState, WheelArray,
};
use rwctl::env::{make_transition, reward_fn, Action, Environment, Goal, RewardConfig, Transition};
use rwctl::harness::metrics::metrics;
use rwctl::harness::run::{rollout, scenario_environment, training_environment};
use rwctl::harness::RunConfig;
use rwctl::nn::{Activation, DenseNet};

const KINEMATICS_TOL_RAD: f64 = 1e-6;
const CONSERVATION_REL_TOL: f64 = 1e-6;
const REWARD_TOL: f64 = 1e-12;
const GRADIENT_REL_TOL: f64 = 1e-4;
const TD_TARGET_TOL: f64 = 1e-12;
const LAMBDA_SUM_TOL: f64 = 1e-12;
const DWC_THRESHOLD: f64 = 0.2;
const PD_SETTLE_LIMIT_S: f64 = 500.0;
const PD_POST_TO_PRE_RATIO: f64 = 2.0;

const LEARNING_SEEDS: [u64; 3] = [0, 1, 2];
const LEARNING_STEPS: usize = 100_000;
const ABLATION_STEPS: usize = 50_000;
const ABLATION_EVAL_INTERVAL: usize = 2_500;
/// Mean sparse return over 20 evaluation episodes that counts as reached.
const ABLATION_RETURN_THRESHOLD: f64 = 0.5;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn c1_kinematics() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let dt = 0.01;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let q0 = random_unit_quaternion(&mut rng);
        let mut sigma = mrp_of_q(q0);
        let mut exact = q0;
        for _ in 0..100 {
            let w = loop {
                let w = Vector3::from_fn(|_, _| rng.gen_range(-0.5..0.5));
                if w.norm() <= 0.5 {
                    break w;
                }
            };
            for _ in 0..100 {
                let f = |s: &Vector3<f64>| rwctl::attitude::mrp_rate(&AttitudeMRP::from_vector(*s), &w);
                let k1 = f(&sigma);
                let k2 = f(&(sigma + k1 * (dt / 2.0)));
                let k3 = f(&(sigma + k2 * (dt / 2.0)));
                let k4 = f(&(sigma + k3 * dt));
                sigma += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (dt / 6.0);
                sigma = AttitudeMRP::from_vector(sigma).canonical().sigma;
            }
            exact = q_constant_rate(exact, &w, 1.0);
        }
        worst = worst.max(angle_between(exact, q_of_mrp(&sigma)));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < KINEMATICS_TOL_RAD && secs < 10.0,
        format!("max angle {worst:.2e} rad (< {KINEMATICS_TOL_RAD:e}), 100 cases x 100 s in {secs:.2} s"),
    )
}

fn c2_conservation() -> Outcome {
    let start = Instant::now();
    let model = SpacecraftModel::default();
    let array = WheelArray::new(&model.wheels).unwrap();
    let j = *model.inertia.matrix();
    let iw = model.wheels.inertia;
    let total = |s: &SpacecraftState| {
        let mut hw = Vector3::zeros();
        for (i, col) in array.geometry.column_iter().enumerate() {
            hw += col * (iw * s.wheel_speeds[i]);
        }
        rot(q_of_mrp(&s.attitude.sigma)) * (j * s.omega + hw)
    };
    let run = |torques: bool| {
        let mut s = SpacecraftState::at_rest(array.len());
        s.omega = Vector3::new(0.03, -0.02, 0.04);
        s.attitude = AttitudeMRP::new(0.2, -0.1, 0.3);
        let (h0, e0) = (total(&s), body_kinetic_energy(&s, &model));
        let mut worst_h: f64 = 0.0;
        let mut worst_e: f64 = 0.0;
        for k in 0..10_000 {
            let t = k as f64 * 0.1;
            let cmd: Vec<f64> = (0..array.len())
                .map(|i| if torques { 2e-5 * (0.013 * t + 1.7 * i as f64).sin() } else { 0.0 })
                .collect();
            s = step(&s, &cmd, 0.1, &model, &array).unwrap().state;
            worst_h = worst_h.max((total(&s) - h0).norm() / h0.norm());
            worst_e = worst_e.max((body_kinetic_energy(&s, &model) - e0).abs() / e0);
        }
        (worst_h, worst_e)
    };
    let (h_free, e_free) = run(false);
    let (h_wheels, _) = run(true);
    let secs = start.elapsed().as_secs_f64();
    let tol = CONSERVATION_REL_TOL;
    check(
        h_free < tol && e_free < tol && h_wheels < tol && secs < 10.0,
        format!(
            "torque-free |dH|/H {h_free:.1e}, |dT|/T {e_free:.1e}; with wheel torques |dH|/H {h_wheels:.1e}; 1000 s at dt 0.1 in {secs:.2} s"
        ),
    )
}

fn c3_rewards() -> Outcome {
    let cases = [((0.5, 0.3, 0.1), 0.19), ((0.2, 0.2, 0.0), 0.01), ((0.3, 0.4, 1.2), -10.11)];
    let mut worst: f64 = 0.0;
    for ((a, b, c), want) in cases {
        worst = worst.max((reward_fn(a, b, c) - want).abs());
    }
    check(worst < REWARD_TOL, format!("max deviation {worst:.1e} over 3 cases"))
}

fn c4_gradients() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let acts = [Activation::Relu, Activation::Tanh, Activation::Identity];
    let mut worst: f64 = 0.0;
    for k in 0..50 {
        let n_layers = rng.gen_range(1..=3);
        let mut sizes = vec![rng.gen_range(1..=6)];
        for _ in 0..n_layers {
            sizes.push(rng.gen_range(1..=6));
        }
        let net = DenseNet::new(&sizes, acts[k % 2], acts[(k / 2) % 3], &mut rng);
        let batch = rng.gen_range(1..=4);
        let x = DMatrix::from_fn(sizes[0], batch, |_, _| rng.gen_range(-1.0..1.0));
        let g = DMatrix::from_fn(*sizes.last().unwrap(), batch, |_, _| rng.gen_range(-1.0..1.0));
        worst = worst.max(gradient_check(&net, &x, &g, 1e-6));
    }
    let secs = start.elapsed().as_secs_f64();
    check(
        worst < GRADIENT_REL_TOL && secs < 30.0,
        format!("max relative error {worst:.1e} over 50 nets in {secs:.2} s"),
    )
}

fn random_episode(env: &mut Environment, rng: &mut ChaCha8Rng, seed: u64, amp: f64) -> Vec<Transition> {
    let (mut obs, _) = env.reset(seed).unwrap();
    let mut out = Vec::new();
    loop {
        let a = Action(std::array::from_fn(|_| rng.gen_range(-amp..amp)));
        let r = env.step(&a).unwrap();
        out.push(make_transition(&obs, &a, &r));
        obs = r.obs;
        if r.done {
            return out;
        }
    }
}

fn logged_agent(scale_critic: f64) -> Td3Agent {
    let cfg = RunConfig::default();
    let mut env = training_environment(&cfg).unwrap();
    let mut agent = Td3Agent::new(cfg.agent.clone(), 55).unwrap();
    agent.nets.critic1.scale_output_layer(scale_critic);
    let mut rng = ChaCha8Rng::seed_from_u64(56);
    for s in 0..5 {
        let ep = random_episode(&mut env, &mut rng, s, 0.5);
        agent.store_episode(&ep, &cfg.environment.reward).unwrap();
    }
    agent.set_logging(true);
    agent
}

fn c5_td3() -> Outcome {
    let y = td_target(0.19, 0.99, false, 1.0, 0.8);
    let target_ok = (y - 0.982).abs() < TD_TARGET_TOL;
    let mut agent = logged_agent(1.0);
    let mut last_actor = agent.nets.actor.flat_params();
    let mut schedule_ok = true;
    let mut actor_updates = 0;
    for k in 1..=1000u64 {
        agent.update().unwrap();
        let rec = agent.take_log().pop().unwrap();
        let now = agent.nets.actor.flat_params();
        let changed = now != last_actor;
        if rec.critic_update != k || rec.actor_updated != (k % 2 == 0) || changed != rec.actor_updated {
            schedule_ok = false;
        }
        actor_updates += usize::from(rec.actor_updated);
        last_actor = now;
    }
    check(
        target_ok && schedule_ok && actor_updates == 500,
        format!("target {y:.15} (0.982), {actor_updates} actor updates in 1000 critic updates, on every 2nd: {schedule_ok}"),
    )
}

fn c6_dwc() -> Outcome {
    let mut within = true;
    let mut identical = true;
    let (mut total, mut clipped) = (0usize, 0usize);
    // the second agent has an inflated critic so that clipping is exercised
    for scale in [1.0, 200.0] {
        let mut agent = logged_agent(scale);
        for _ in 0..200 {
            agent.update().unwrap();
        }
        for rec in agent.take_log().into_iter().filter(|r| r.actor_updated) {
            for (pre, post) in rec.dwc_pre.iter().zip(&rec.dwc_post) {
                for d in 0..4 {
                    total += 1;
                    within &= (-DWC_THRESHOLD..=DWC_THRESHOLD).contains(&post[d]);
                    if pre[d].abs() <= DWC_THRESHOLD {
                        identical &= pre[d].to_bits() == post[d].to_bits();
                    } else {
                        clipped += 1;
                        identical &= post[d] == DWC_THRESHOLD.copysign(pre[d]);
                    }
                }
            }
        }
    }
    check(
        within && identical && clipped > 0 && total > 0,
        format!("{total} logged components, {clipped} clipped; all within +-0.2: {within}; unclipped bit-identical: {identical}"),
    )
}

fn c7_her() -> Outcome {
    let cfg = RunConfig::default();
    let reward = cfg.environment.reward;
    let mut env = training_environment(&cfg).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let k = cfg.agent.her_k;
    let (mut matched, mut good, mut growth_ok) = (0usize, 0usize, true);
    for seed in 0..10 {
        let ep = random_episode(&mut env, &mut rng, seed, 0.3);
        let n = ep.len();
        let mut buf = ReplayBuffer::new(100_000);
        let added = her::her_store(&ep, &mut buf, k, true, &reward, &mut rng).unwrap();
        growth_ok &= added == k * (n - 1) && buf.len() == n + k * (n - 1);
        // layout: each original followed by its k relabeled copies
        let mut pos = 0;
        for (t, orig) in ep.iter().enumerate() {
            pos += 1;
            if t + 1 == n {
                break;
            }
            let next_goal = Goal::new(orig.info.unwrap().sigma_abs_next);
            let expect = her::relabel(orig, &next_goal, &reward).unwrap();
            for _ in 0..k {
                let stored = buf.get(pos).unwrap();
                pos += 1;
                if stored.obs == expect.obs {
                    matched += 1;
                    let info = stored.info.unwrap();
                    let terms = reward.terms(info.e_prev, info.e_curr, info.omega_norm);
                    if info.e_curr == 0.0 && terms.accuracy == 0.01 && stored.reward == terms.total() {
                        good += 1;
                    }
                }
            }
        }
    }
    check(
        matched > 0 && good == matched && growth_ok,
        format!("{good}/{matched} next-state-goal relabels have e_curr = 0 and +0.01; growth n + k(n-1): {growth_ok}"),
    )
}

fn c8_redistribution() -> Outcome {
    let cfg = RunConfig::default();
    let fault_t = cfg.scenario.fault_time().unwrap();
    let mut env = scenario_environment(&cfg).unwrap();
    let agent = Td3Agent::new(cfg.agent.clone(), 8).unwrap();
    let mut policy = ActorPolicy::new(&agent);
    env.reset(0).unwrap();
    let mut wheel0_zero = true;
    let mut lambda_ok = true;
    let mut post_steps = 0;
    let mut max_pre: f64 = 0.0;
    while !env.is_done() {
        let t = env.steps() as f64 * env.config.control_dt;
        let r = rwctl::agent::train::Policy::step(&mut policy, &mut env).unwrap();
        if t >= fault_t {
            post_steps += 1;
            wheel0_zero &= r.detail.tau_applied[0] == 0.0;
            let plan = env.redistribution().unwrap();
            let active: f64 = plan.weights.lambda.iter().zip(&plan.channel_of).filter(|(_, c)| c.is_some()).map(|(l, _)| l).sum();
            lambda_ok &= plan.weights.lambda[0] == 0.0 && (active - 1.0).abs() < LAMBDA_SUM_TOL;
        } else {
            max_pre = max_pre.max(r.detail.tau_applied[0].abs());
        }
    }
    let mut pd_env = scenario_environment(&cfg).unwrap();
    let mut pd = PdController::new(cfg.pd, cfg.scenario.wheels.beta).unwrap();
    let tel = rollout(&mut pd_env, &mut pd, 0).unwrap();
    let pd_zero = tel.iter().filter(|r| r.t >= fault_t).all(|r| r.tau_applied[0] == 0.0);
    check(
        wheel0_zero && lambda_ok && pd_zero && post_steps > 0 && max_pre > 0.0,
        format!(
            "agent: wheel-0 torque exactly 0 on {post_steps} post-fault steps: {wheel0_zero}, active lambda sum = 1: {lambda_ok}; pd: {pd_zero}"
        ),
    )
}

fn c9_pd() -> Outcome {
    let start = Instant::now();
    let cfg = RunConfig::default();
    let mut env = scenario_environment(&cfg).unwrap();
    let mut pd = PdController::new(cfg.pd, cfg.scenario.wheels.beta).unwrap();
    let tel = rollout(&mut env, &mut pd, cfg.seeds[0]).unwrap();
    let m = metrics(&tel, cfg.scenario.fault_time()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let settled = m.settle_time_s.is_some_and(|t| t <= PD_SETTLE_LIMIT_S);
    let ratio = m.mean_err_post_deg / m.mean_err_pre_deg;
    let window = |a: f64, b: f64| {
        let v: Vec<f64> = tel.iter().filter(|r| r.t >= a && r.t < b).map(|r| r.error_angle_deg).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let late_ratio = window(4000.0, 8000.0) / window(2000.0, 3000.0);
    check(
        settled && ratio >= PD_POST_TO_PRE_RATIO && secs < 60.0,
        format!(
            "settle {:?} s (<= 500); mean error pre {:.3e} deg, post {:.3e} deg, ratio {ratio:.2e} (>= 2); \
             [4000,8000)/[2000,3000) ratio {late_ratio:.2e}; {secs:.2} s",
            m.settle_time_s, m.mean_err_pre_deg, m.mean_err_post_deg
        ),
    )
}

fn c10_learning() -> Outcome {
    let mut cfg = RunConfig::default();
    cfg.train.total_steps = LEARNING_STEPS;
    cfg.train.eval_interval = LEARNING_STEPS;
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in LEARNING_SEEDS {
        let start = Instant::now();
        let mut env = training_environment(&cfg).unwrap();
        let mut eval_env = eval_environment(&env, &cfg.train.eval_fault_schedule).unwrap();
        let seeds: Vec<u64> = (0..cfg.train.eval_episodes as u64).map(|i| cfg.train.eval_seed + i).collect();
        let mut pd = PdController::new(cfg.pd, cfg.scenario.wheels.beta).unwrap();
        let pd_stats = evaluate(&mut eval_env, &mut pd, seeds.iter().copied()).unwrap();
        let mut agent = Td3Agent::new(cfg.agent.clone(), seed).unwrap();
        let report = train(&mut agent, &mut env, &cfg.train, seed, |_, _| {}).unwrap();
        let first = report.evals.first().unwrap().stats;
        let last = report.evals.last().unwrap().stats;
        let win = last.mean_return > first.mean_return && last.mean_error_deg < pd_stats.mean_error_deg;
        wins += usize::from(win);
        lines.push(format!(
            "seed {seed}: return {:.3} -> {:.3}, error {:.2} deg vs pd {:.2} deg ({:.0} s)",
            first.mean_return,
            last.mean_return,
            last.mean_error_deg,
            pd_stats.mean_error_deg,
            start.elapsed().as_secs_f64()
        ));
    }
    check(wins >= 2, format!("{wins}/3 seeds; {}", lines.join("; ")))
}

/// Environment steps until the mean sparse evaluation return first reaches
/// the threshold, if it does within the budget.
fn steps_to_threshold(cfg: &RunConfig, agent_cfg: AgentConfig, seed: u64) -> (Option<usize>, f64) {
    let mut env = training_environment(cfg).unwrap();
    let mut agent = Td3Agent::new(agent_cfg, seed).unwrap();
    let report = train(&mut agent, &mut env, &cfg.train, seed, |_, _| {}).unwrap();
    let hit = report
        .evals
        .iter()
        .find(|p| p.stats.mean_return >= ABLATION_RETURN_THRESHOLD)
        .map(|p| p.env_steps);
    let best = report.evals.iter().map(|p| p.stats.mean_return).fold(f64::NEG_INFINITY, f64::max);
    (hit, best)
}

fn c11_ablation() -> Outcome {
    let mut cfg = RunConfig::default();
    cfg.environment.reward = RewardConfig { sparse: true, ..RewardConfig::default() };
    cfg.train.total_steps = ABLATION_STEPS;
    cfg.train.eval_interval = ABLATION_EVAL_INTERVAL;
    let mut wins = 0;
    let mut lines = Vec::new();
    for seed in LEARNING_SEEDS {
        let (hd, hd_best) = steps_to_threshold(&cfg, cfg.agent.clone(), seed);
        let (plain, plain_best) = steps_to_threshold(&cfg, AgentConfig::plain_td3(), seed);
        let win = match (hd, plain) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        };
        wins += usize::from(win);
        let fmt = |s: Option<usize>| s.map_or("never".to_string(), |s| s.to_string());
        lines.push(format!(
            "seed {seed}: td3-hd {} (best {hd_best:.3}), td3 {} (best {plain_best:.3})",
            fmt(hd),
            fmt(plain)
        ));
    }
    check(
        wins >= 2,
        format!("{wins}/3 seeds reach sparse return {ABLATION_RETURN_THRESHOLD} sooner with relabeling; {}", lines.join("; ")),
    )
}

fn c12_determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.toml");
    std::fs::write(
        &config,
        "seeds = [4]\n\n[scenario]\nduration = 400.0\nfault_schedule = [{ wheel = 0, time = 150.0 }]\n\n\
         [agent]\nhidden = [32, 32]\nbatch_size = 32\n\n[train]\ntotal_steps = 1500\nwarmup_steps = 300\neval_interval = 500\neval_episodes = 2\n",
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_rwctl"))
            .args(["train", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(&out)
            .env("RUST_LOG", "warn")
            .output()
            .unwrap();
        assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
        out
    };
    let (a, b) = (run("a"), run("b"));
    let files = ["checkpoint.bin", "telemetry.csv", "learning_curve.csv", "train_report.toml", "run.toml"];
    let same: Vec<bool> = files
        .iter()
        .map(|f| std::fs::read(a.join(f)).unwrap() == std::fs::read(b.join(f)).unwrap())
        .collect();
    check(
        same.iter().all(|&s| s),
        format!("byte-identical outputs of two train runs: {:?}", files.iter().zip(&same).collect::<Vec<_>>()),
    )
}

fn main() {
    let quick = std::env::var("RWCTL_ACCEPTANCE_QUICK").is_ok_and(|v| v == "1");
    let criteria: Vec<(&str, fn() -> Outcome, bool)> = vec![
        ("1 kinematics oracle", c1_kinematics, false),
        ("2 conservation", c2_conservation, false),
        ("3 reward vectors", c3_rewards, false),
        ("4 gradient check", c4_gradients, false),
        ("5 td3 mechanics", c5_td3, false),
        ("6 dwc property", c6_dwc, false),
        ("7 her property", c7_her, false),
        ("8 redistribution", c8_redistribution, false),
        ("9 pd baseline", c9_pd, false),
        ("10 desk-scale learning", c10_learning, true),
        ("11 ablation direction", c11_ablation, true),
        ("12 determinism", c12_determinism, false),
    ];
    let mut failed = 0;
    for (name, f, long) in criteria {
        if long && quick {
            println!("SKIP {name}: RWCTL_ACCEPTANCE_QUICK=1");
            continue;
        }
        let o = f();
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.pass);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
