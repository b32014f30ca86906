use innerfn::inner::InnerFunction;
use innerfn::norms::{mixed_norm_truncated, level_set_integral, DerivOf, MixedNormParams, NormKernel};
use innerfn::weights::RadialWeight;
use std::time::Instant;
fn main() {
    let s = InnerFunction::atomic();
    let t0 = Instant::now();
    let params = MixedNormParams::new(1.0, 1.0, RadialWeight::one()).unwrap();
    let tv = mixed_norm_truncated(&DerivOf(&s), &params, 14, NormKernel::Density).unwrap();
    println!("mixed m=14 p=q=1: {:.2}s value={:.6}", t0.elapsed().as_secs_f64(), tv.value);
    let t0 = Instant::now();
    let params2 = MixedNormParams::new(2.0, 2.0, RadialWeight::one()).unwrap();
    let tv = mixed_norm_truncated(&DerivOf(&s), &params2, 14, NormKernel::Density).unwrap();
    println!("mixed m=14 p=q=2: {:.2}s value={:.6}", t0.elapsed().as_secs_f64(), tv.value);
    let t0 = Instant::now();
    let tv = level_set_integral(&s, 0.5, 0.75, &RadialWeight::one(), 14).unwrap();
    println!("level m=14: {:.2}s value={:.6}", t0.elapsed().as_secs_f64(), tv.value);
    let t0 = Instant::now();
    let tv = mixed_norm_truncated(&DerivOf(&s), &params, 16, NormKernel::Density).unwrap();
    println!("mixed m=16 p=q=1: {:.2}s value={:.6}", t0.elapsed().as_secs_f64(), tv.value);
}
