// Final full calibration: all agents x 5 seeds, then the trend criteria in
// their acceptance forms.
use leoris_harness::*;
use leoris_core::units::dbm_to_watts;
use std::time::Instant;

fn main() {
    let out_base = std::env::temp_dir().join("leoris_final");
    std::fs::remove_dir_all(&out_base).ok();
    let mut final_medians = std::collections::BTreeMap::new();
    for (name, mut cfg) in [
        ("a3c", ExperimentConfig::desk_a3c()),
        ("trpo", ExperimentConfig::desk_trpo()),
        ("td3", ExperimentConfig::desk_td3()),
    ] {
        cfg.out_dir = out_base.join(name).display().to_string();
        let t0 = Instant::now();
        let rows = run_training(&cfg).unwrap();
        let mut improved = 0;
        let mut finals = vec![];
        for &seed in &cfg.seeds {
            let sr: Vec<&EpisodeStats> = rows.iter().filter(|r| r.seed == seed).collect();
            let n = sr.len();
            let k = n / 5;
            let first: f64 = sr[..k].iter().map(|r| r.mean_reward).sum::<f64>() / k as f64;
            let last: f64 = sr[n-k..].iter().map(|r| r.mean_reward).sum::<f64>() / k as f64;
            if last > first { improved += 1; }
            finals.push(last);
            println!("  {name} seed {seed}: {first:.4} -> {last:.4}");
        }
        let med = median(&finals);
        println!("{name}: improved {improved}/5, final median {med:.4}, wall {:.0}s", t0.elapsed().as_secs_f64());
        final_medians.insert(name, med);
    }
    println!("ORDERING trpo {:.4} td3 {:.4} a3c {:.4}", final_medians["trpo"], final_medians["td3"], final_medians["a3c"]);

    // c8 on TRPO checkpoints.
    let vals8: Vec<String> = [40.0, 45.0, 50.0, 56.0].iter().map(|d| dbm_to_watts(*d).to_string()).collect();
    let mut c8 = ExperimentConfig::desk_trpo();
    c8.out_dir = out_base.join("s8").display().to_string();
    let r8 = run_sweep(&c8, "p_sat_max", &vals8, &SweepMode::Eval { checkpoint_dir: out_base.join("trpo") }).unwrap();
    let ees: Vec<f64> = r8.iter().map(|r| r.median_ee).collect();
    let x: Vec<f64> = (0..4).map(|i| i as f64).collect();
    println!("C8 tau {:.2} ees {ees:?}", kendall_tau(&x, &ees));

    // c9 per agent.
    let vals9: Vec<String> = ["0.0001","0.001","0.01","0.1"].iter().map(|s| s.to_string()).collect();
    for name in ["td3", "a3c", "trpo"] {
        let mut c9 = match name { "td3" => ExperimentConfig::desk_td3(), "a3c" => ExperimentConfig::desk_a3c(), _ => ExperimentConfig::desk_trpo() };
        c9.out_dir = out_base.join(format!("s9_{name}")).display().to_string();
        c9.eval_episodes = 20;
        let r9 = run_sweep(&c9, "csi_error_variance", &vals9, &SweepMode::Eval { checkpoint_dir: out_base.join(name) }).unwrap();
        println!("C9 {name}: {:?}", r9.iter().map(|r| r.median_reliability).collect::<Vec<_>>());
    }

    // c10 train-mode on TRPO.
    let mut c10 = ExperimentConfig::desk_trpo();
    c10.out_dir = out_base.join("s10").display().to_string();
    let vals10: Vec<String> = ["bd_active","diag_active","diag_passive"].iter().map(|s| s.to_string()).collect();
    let r10 = run_sweep(&c10, "ris_mode", &vals10, &SweepMode::Train).unwrap();
    for r in &r10 { println!("C10 {}: EE {:.5e}", r.value, r.median_ee); }
}
