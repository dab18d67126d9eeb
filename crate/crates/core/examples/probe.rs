use hadamard6::{catalog, continuation::*, objective, spectral};

fn main() {
    let cfg = IntegratorConfig::default();
    let dirs = catalog::initial_directions();

    // gap at Fourier / family points / tao
    let s = spectral::eig_hessian(&objective::hessian(&catalog::fourier()), cfg.null_tol).unwrap();
    println!("fourier: null_dim {}, |l5| = {:.4e}, eigenvalues[0..6] = {:?}",
        s.null_dim(), s.fifth_smallest_abs(), &s.eigenvalues()[..6]);
    let s = spectral::eig_hessian(&objective::hessian(&catalog::fourier_family(1.234, 0.567)), cfg.null_tol).unwrap();
    println!("family point: null_dim {}, |l5| = {:.4e}", s.null_dim(), s.fifth_smallest_abs());
    let s = spectral::eig_hessian(&objective::hessian(&catalog::tao().unwrap()), cfg.null_tol).unwrap();
    println!("tao: null_dim {}, smallest |l| = {:.4e}", s.null_dim(), s.eigenvalues()[0].abs());

    // frame sigma_min along fig1 and fig2, tracked via manual stepping
    let mut d = [0.0; 25];
    for (k, v) in d.iter_mut().enumerate() { *v = dirs[1][k] + dirs[2][k]; }
    let n = d.iter().map(|x| x * x).sum::<f64>().sqrt();
    for v in &mut d { *v /= n; }
    let mut state = CurveState::initial(catalog::fourier(), &d, Some(&dirs), &cfg).unwrap();
    let mut min_sigma = f64::INFINITY;
    for _ in 0..1000 {
        state = step(&state, &cfg).unwrap();
        min_sigma = min_sigma.min(frame_min_singular(&state.frame));
    }
    println!("fig1 min frame sigma over curve: {min_sigma:.4}");

    // fig2 endpoint nullspace
    let (end, _) = generate_f6([0.23, 0.17, 0.34, 0.26], &cfg).unwrap();
    let s = spectral::eig_hessian(&objective::hessian(&end), cfg.null_tol).unwrap();
    println!("fig2 endpoint: null_dim {}, |l5| = {:.4e}", s.null_dim(), s.fifth_smallest_abs());

    // first-step increment magnitude a vs dtheta/sqrt(14)
    let state = CurveState::initial(catalog::fourier(), &d, Some(&dirs), &cfg).unwrap();
    let next = step(&state, &cfg).unwrap();
    let mut mags: Vec<f64> = next.phases.as_array().iter().zip(state.phases.as_array())
        .map(|(a, b)| (a - b).abs()).collect();
    mags.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("increments: min {:.3e} / mid {:.3e} / max {:.3e}; dtheta/sqrt14 = {:.6e}",
        mags[0], mags[20], mags[24], cfg.step_length / 14.0_f64.sqrt());
}
