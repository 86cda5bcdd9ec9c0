// probe: discriminative(real, real-resample) at full budget, several seeds
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use timebridge::{data, metrics};

fn main() {
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    let real = data::toy_sines(1000, 24, 2, &mut rng).values;
    let resampled = data::toy_sines(1000, 24, 2, &mut rng).values;
    for seed in [0u64, 1, 2] {
        let mut cfg = metrics::MetricNetConfig::default();
        cfg.seed = seed;
        let t = std::time::Instant::now();
        let disc = metrics::discriminative_score(&real, &resampled, &cfg).unwrap();
        println!("seed {seed}: disc = {disc:.4} ({:.0} s)", t.elapsed().as_secs_f64());
    }
}
