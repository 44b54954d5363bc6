//! Tree-structured Parzen search against plain random search on a small
//! mixed continuous/categorical objective.

use cough_ssl::tpe::{optimize, ParamValue, SearchSpace, TpeSettings};

fn objective(c: &[ParamValue]) -> cough_ssl::Result<(f64, f64)> {
    let (x, lr) = (c[0].real(), c[1].real());
    let bonus = [0.0, 0.2, -0.1][c[2].choice()];
    Ok((-(x - 0.3).powi(2) - (lr.log10() + 2.0).powi(2) / 10.0 + bonus, 0.0))
}

fn main() -> cough_ssl::Result<()> {
    let space = SearchSpace::new()
        .uniform("x", -1.0, 1.0)
        .log_uniform("lr", 1e-5, 1.0)
        .categorical("variant", &["a", "b", "c"]);

    for (name, settings) in [("tpe", TpeSettings::default()), ("random", TpeSettings::random_search())] {
        let mut best = Vec::new();
        for seed in 0..10 {
            best.push(optimize(&space, &settings, 60, seed, objective)?.best_trial().objective);
        }
        best.sort_by(f64::total_cmp);
        println!("{name:>6}: median best {:.5}, worst {:.5}", best[5], best[0]);
    }

    let result = optimize(&space, &TpeSettings::default(), 60, 0, objective)?;
    let t = result.best_trial();
    let shown: Vec<String> = t.config.iter().enumerate().map(|(i, v)| space.format_value(i, v)).collect();
    println!("best trial #{}: {} -> {:.5}", t.number, shown.join(", "), t.objective);
    let curve = result.running_best();
    println!("running best at 10/30/60 trials: {:.4} {:.4} {:.4}", curve[9], curve[29], curve[59]);
    Ok(())
}
