use la_circles::bench::{error_score, generate_scene, GroundTruthCircle, SceneSpec, ES_ETA, ES_MU};
use la_circles::detector::{detect_one, DetectorConfig};

fn main() {
    let spec = SceneSpec::circles(200, 200, &[(100.0, 100.0, 40.0)], 0.02);
    let truth = GroundTruthCircle {
        x: 100.0,
        y: 100.0,
        r: 40.0,
    };
    let cfg = DetectorConfig::default();
    let mut successes = 0;
    let mut es_sum = 0.0;
    let mut worst: Vec<(u64, f64, f64)> = Vec::new();
    for seed in 100u64..165 {
        let (em, _) = generate_scene(&spec, seed).unwrap();
        let r = detect_one(&em, &cfg, seed).unwrap();
        let es = error_score(&truth, &r.circle, ES_ETA, ES_MU);
        es_sum += es;
        if es < 1.0 {
            successes += 1;
        } else {
            worst.push((seed, es, r.beta));
        }
    }
    println!(
        "detect_one path: sr={}/65 mean_es={:.3} failures={:?}",
        successes,
        es_sum / 65.0,
        worst
    );
}
