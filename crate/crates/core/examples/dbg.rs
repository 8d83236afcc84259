use knotter::curve::{CoordSeries, FourierLoop, IsotopyFamily};
use knotter::genericity::{validate, GenericityConfig};
use knotter::tracer::{trace, TraceConfig, TraceError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

fn random_generic_loop(seed: u64, degree: usize) -> FourierLoop {
    let cfg = GenericityConfig::default();
    let mut s = seed;
    loop {
        let mut rng = ChaCha8Rng::seed_from_u64(s);
        let mut mk = |base: (f64, f64), rng: &mut ChaCha8Rng| {
            let mut series = CoordSeries::zero(degree);
            for k in 1..=degree {
                let amp = 0.8 / (k * k) as f64;
                let mut a = rng.gen_range(-amp..amp);
                let mut b = rng.gen_range(-amp..amp);
                if k == 1 { a += base.0; b += base.1; }
                series = series.with(k, a, b);
            }
            series
        };
        let x = mk((1.0, 0.0), &mut rng);
        let y = mk((0.0, 1.0), &mut rng);
        let z = mk((0.0, 0.0), &mut rng);
        let l = FourierLoop::new(x, y, z).unwrap();
        if validate(&l, &cfg).passed() { return l; }
        s += 101;
    }
}

fn main() {
    let cfg = TraceConfig::default();
    let t0 = Instant::now();
    let (mut events, mut rejected, mut conflicts, mut failed) = (0usize, 0usize, 0usize, 0usize);
    let n = 30u64;
    for i in 0..n {
        let a = random_generic_loop(1000 + 17 * i, 4);
        let b = random_generic_loop(50_000 + 23 * i, 4);
        let fam = IsotopyFamily::new(vec![(0.0, a), (1.0, b)]).unwrap();
        match trace(&fam, &cfg) {
            Ok(script) => {
                events += script.events.len();
                if !script.passed() {
                    failed += 1;
                    println!("--- trace {i} verification failed:");
                    for line in script.to_text().lines() {
                        if line.contains("UNCLASSIFIED") || line.contains("warning") || line.contains("note") || line.contains("verified=NO") {
                            println!("    {line}");
                        }
                    }
                }
            }
            Err(TraceError::NotAnIsotopy { .. }) => rejected += 1,
            Err(TraceError::ResolutionConflict { details, .. }) => { conflicts += 1; println!("trace {i} CONFLICT: {details}"); }
            Err(e) => { failed += 1; println!("trace {i} error: {e}"); }
        }
    }
    println!("{n} traces in {:?}: {events} events, {rejected} rejected, {conflicts} conflicts, {failed} failed", t0.elapsed());
}
