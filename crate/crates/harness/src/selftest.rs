//! Fast built-in oracle suite for the `selftest` subcommand: spot-checks
//! the deterministic math against frozen reference values and prints one
//! line per check.

use leoris_core::bdris::{project_block, Block2};
use leoris_core::channel::{amplitude_path_gain, sample_rician, satellite_gain};
use leoris_core::config::HoverParams;
use leoris_core::env::{action_dim, decode_action, EnvConfig};
use leoris_core::linalg::C64;
use leoris_core::power::{bdaris_power, hover_power};
use leoris_core::seeding::substream;
use leoris_core::units::dbm_to_watts;
use leoris_core::ScenarioConfig;
use rand::Rng;

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn check(name: &'static str, pass: bool, detail: String) -> Check {
    Check { name, pass, detail }
}

pub fn run() -> bool {
    let mut checks: Vec<Check> = Vec::new();
    let cfg = ScenarioConfig::default();

    {
        let g = satellite_gain(0.0, cfg.theta_3db_rad, cfg.sat_gain_max_linear).unwrap();
        checks.push(check(
            "satellite gain at boresight",
            (g - cfg.sat_gain_max_linear).abs() / cfg.sat_gain_max_linear < 1e-6,
            format!("{g:.6} vs {:.6}", cfg.sat_gain_max_linear),
        ));
        let h = satellite_gain(cfg.theta_3db_rad, cfg.theta_3db_rad, 1.0).unwrap();
        checks.push(check(
            "satellite gain half-power point",
            (h - 0.5).abs() < 0.005,
            format!("{h:.8}"),
        ));
    }
    {
        let got = amplitude_path_gain(520e3, &cfg, 1.0, 1.0).unwrap();
        checks.push(check(
            "path gain at 520 km / 8 GHz",
            (got - 3.2933365961778266e-17).abs() / 3.2933365961778266e-17 < 1e-9,
            format!("{got:.6e}"),
        ));
    }
    {
        let mut rng = substream(1, &[]);
        let los = vec![C64::new(0.6, -0.8)];
        let exact = sample_rician(&los, 1e12, &mut rng).unwrap();
        checks.push(check(
            "rician LoS-only limit",
            exact == los,
            "exact passthrough at K >= 1e12".into(),
        ));
    }
    {
        let p = hover_power(&HoverParams::default()).unwrap();
        checks.push(check(
            "hover power reference",
            (p - 699.0557272313748).abs() < 1e-6,
            format!("{p:.6} W"),
        ));
        let b = bdaris_power(1.0, 64, 1.25, dbm_to_watts(-10.0), dbm_to_watts(-5.0)).unwrap();
        checks.push(check(
            "RIS power reference",
            (b - 1.2633192885125388).abs() < 1e-9,
            format!("{b:.8} W"),
        ));
    }
    {
        let mut rng = substream(2, &[]);
        let mut ok = true;
        for _ in 0..200 {
            let z = |rng: &mut rand_chacha::ChaCha8Rng| {
                C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))
            };
            let raw = Block2::new(z(&mut rng), z(&mut rng), z(&mut rng));
            let once = project_block(&raw, 1.0).unwrap();
            let twice = project_block(&once, 1.0).unwrap();
            let drift = (once.phi1 - twice.phi1).norm()
                + (once.phi2 - twice.phi2).norm()
                + (once.b - twice.b).norm();
            if once.singular_values()[0] > 1.0 + 1e-10 || drift > 1e-10 {
                ok = false;
                break;
            }
        }
        checks.push(check("BD-RIS projection idempotent + bounded", ok, "200 random blocks".into()));
    }
    {
        let scen = ScenarioConfig::desk();
        let env_cfg = EnvConfig::default();
        let d = action_dim(&scen, &env_cfg);
        let mut rng = substream(3, &[]);
        let mut ok = true;
        for _ in 0..500 {
            let raw: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
            let action = decode_action(&raw, &scen, &env_cfg).unwrap();
            if action.validate(scen.num_sat_antennas, scen.num_users, 1e-12).is_err()
                || !action.phi.is_feasible(1e-10)
            {
                ok = false;
                break;
            }
        }
        checks.push(check("action decoding feasible by construction", ok, "500 random actions".into()));
    }
    {
        use leoris_rl::mlp::Mlp;
        let mut rng = substream(4, &[]);
        let net = Mlp::new(&[4, 8, 2], 1.0, &mut rng);
        let x = [0.1, -0.4, 0.8, 0.0];
        let cache = net.forward_cached(&x).unwrap();
        let (grad, _) = net.backward(&cache, &[1.0, -0.5]).unwrap();
        let mut probe = net.clone();
        let flat = net.flat_params();
        let h = 1e-5;
        let mut worst: f64 = 0.0;
        for idx in (0..flat.len()).step_by(9) {
            let mut plus = flat.clone();
            plus[idx] += h;
            probe.set_flat_params(&plus).unwrap();
            let yp = probe.forward(&x).unwrap();
            let mut minus = flat.clone();
            minus[idx] -= h;
            probe.set_flat_params(&minus).unwrap();
            let ym = probe.forward(&x).unwrap();
            let fd = ((yp[0] - ym[0]) - 0.5 * (yp[1] - ym[1])) / (2.0 * h);
            let denom = fd.abs().max(grad[idx].abs()).max(1e-6);
            worst = worst.max((fd - grad[idx]).abs() / denom);
        }
        checks.push(check(
            "network gradients vs finite differences",
            worst < 1e-4,
            format!("max rel err {worst:.2e}"),
        ));
    }

    let mut all = true;
    for c in &checks {
        let tag = if c.pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {} — {}", c.name, c.detail);
        all &= c.pass;
    }
    println!(
        "selftest: {}/{} checks passed",
        checks.iter().filter(|c| c.pass).count(),
        checks.len()
    );
    all
}
