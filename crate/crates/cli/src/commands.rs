use std::error::Error;
use std::path::{Path, PathBuf};
use std::time::Instant;

use loglap::discretization::export::{write_binary, write_nodes, write_triplets};
use loglap::discretization::{assemble, build_mesh, FormMatrices};
use loglap::fractional::expansion_error_with;
use loglap::fucik::{
    randomized_restarts, trace_curve, verify_pair_with, MountainPassOptions, NewtonOptions, StringOptions,
};
use loglap::nonresonance::{jump_level, solve_nonresonance, NonlinearitySpec, NonresonanceOptions};
use loglap::special::DimensionalConstants;
use loglap::spectral::solve_eig;

use crate::config::{emit, emit_settings, AutoOr, RunConfig};
use crate::output::{num, RunDir, Status};

type BoxResult<T> = Result<T, Box<dyn Error>>;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Constants { dim: Option<usize> },
    Assemble { binary: bool },
    Eig,
    Curve,
    Verify { alpha: f64, beta: f64, seed_file: Option<PathBuf> },
    Fracexp,
    Nonres,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants { .. } => "constants",
            Command::Assemble { .. } => "assemble",
            Command::Eig => "eig",
            Command::Curve => "curve",
            Command::Verify { .. } => "verify",
            Command::Fracexp => "fracexp",
            Command::Nonres => "nonres",
        }
    }
}

/// Process exit code for a finished run.
pub const EXIT_OK: i32 = 0;
pub const EXIT_NOT_CONVERGED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

/// Runs `cmd` into `cfg.output_dir` and returns the exit code. Failures
/// after the directory is locked are recorded in its `status.json`.
pub fn run(cmd: &Command, cfg: &RunConfig) -> BoxResult<i32> {
    let root = Path::new(&cfg.output_dir);
    let mut dir = RunDir::open(root, cmd.name(), &emit(cfg), &emit_settings(cfg))?;
    match dispatch(cmd, cfg, &mut dir) {
        Ok(()) => Ok(if dir.finish()? { EXIT_OK } else { EXIT_NOT_CONVERGED }),
        Err(e) => {
            dir.fail(&e.to_string())?;
            Err(e)
        }
    }
}

fn dispatch(cmd: &Command, cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<()> {
    match cmd {
        Command::Constants { dim } => constants(dim.unwrap_or(cfg.domain.dim()), dir),
        Command::Assemble { binary } => assemble_cmd(cfg, *binary, dir),
        Command::Eig => eig(cfg, dir),
        Command::Curve => curve(cfg, dir),
        Command::Verify { alpha, beta, seed_file } => verify(cfg, *alpha, *beta, seed_file.as_deref(), dir),
        Command::Fracexp => fracexp(cfg, dir),
        Command::Nonres => nonres(cfg, dir),
    }
}

fn forms(cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<FormMatrices<f64>> {
    let t = Instant::now();
    let mesh = build_mesh(cfg.domain.build()?, cfg.n)?;
    let forms = assemble(&mesh, &cfg.quad)?;
    dir.timing("assemble", t.elapsed());
    log::info!("assembled n = {} in {:?}", cfg.n, t.elapsed());
    Ok(forms)
}

pub fn mountain_options(cfg: &RunConfig) -> MountainPassOptions<f64> {
    MountainPassOptions {
        images: cfg.m,
        grad_tol: cfg.grad_tol,
        polish_below: cfg.polish.then_some(1e-3),
        metric: cfg.metric,
        string: StringOptions {
            max_sweeps: cfg.max_sweeps,
            parallel: cfg.parallel,
            ..StringOptions::default()
        },
        newton: NewtonOptions::default(),
    }
}

fn constants(dim: usize, dir: &mut RunDir) -> BoxResult<()> {
    let c = DimensionalConstants::<f64>::new(dim)?;
    let body = format!(
        "N = {dim}\nc_N = {}\nrho_N = {}\nd_N = {}\ngamma = {}\n",
        num(c.c_n),
        num(c.rho_n),
        num(c.d_n),
        num(c.gamma)
    );
    print!("{body}");
    dir.write_text("constants.txt", &body)?;
    dir.status("constants", Status::Converged);
    Ok(())
}

fn assemble_cmd(cfg: &RunConfig, binary: bool, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let mut buf = Vec::new();
    write_nodes(&f.mesh.nodes, &mut buf)?;
    dir.write_text("nodes.txt", std::str::from_utf8(&buf)?)?;
    for (name, m) in [("A", &f.a), ("M", &f.mass)] {
        let mut buf = Vec::new();
        write_triplets(m, &mut buf)?;
        dir.write_text(&format!("{name}.txt"), std::str::from_utf8(&buf)?)?;
        if binary {
            let mut bin = Vec::new();
            write_binary(m, &mut bin)?;
            dir.write_raw(&format!("{name}.bin"), &bin)?;
        }
    }
    dir.status("assemble", Status::Converged);
    Ok(())
}

fn eig(cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let t = Instant::now();
    let pairs = solve_eig(&f, cfg.k)?;
    dir.timing("eig", t.elapsed());
    let rows: Vec<String> = pairs
        .iter()
        .map(|p| format!("{},{},{},{}", p.index, num(p.lambda), p.sign.class, num(p.residual)))
        .collect();
    dir.write_table("eig.csv", "k,lambda,sign_class,residual", &rows)?;
    if cfg.dump_vectors {
        let cols: Vec<String> = pairs.iter().map(|p| format!("phi{}", p.index)).collect();
        let rows: Vec<String> = (0..f.n())
            .map(|i| {
                let mut row = num(f.mesh.nodes[i]);
                for p in &pairs {
                    row.push(',');
                    row.push_str(&num(p.vector[i]));
                }
                row
            })
            .collect();
        dir.write_table("eigvecs.csv", &format!("x,{}", cols.join(",")), &rows)?;
    }
    dir.status("eig", Status::Converged);
    Ok(())
}

fn r_grid(cfg: &RunConfig, gap: f64) -> Vec<f64> {
    let hi = match cfg.r_max {
        AutoOr::Auto => 10.0 * gap,
        AutoOr::Value(v) => v,
    };
    let last = cfg.steps - 1;
    (0..cfg.steps)
        .map(|i| if i == last { hi } else { cfg.r_min + (hi - cfg.r_min) * i as f64 / last as f64 })
        .collect()
}

fn curve(cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let eig = solve_eig(&f, 2)?;
    let gap = eig[1].lambda - eig[0].lambda;
    let mut grid = r_grid(cfg, gap);
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("r grid is empty: r_max must exceed r_min = {}", cfg.r_min).into());
    }
    // the continuation always starts from the second eigenfunction at r = 0
    let prepended = grid[0] > 0.0;
    if prepended {
        grid.insert(0, 0.0);
    }
    let opts = mountain_options(cfg);
    let t = Instant::now();
    let res = trace_curve(&f, &grid, &opts)?;
    dir.timing("curve", t.elapsed());
    let skip = usize::from(prepended);
    let points: Vec<_> = res.points.iter().skip(skip).chain(res.mirrored.iter().skip(skip)).collect();
    let rows: Vec<String> = points
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{},{}",
                num(p.r),
                num(p.alpha),
                num(p.beta),
                num(p.c),
                num(p.residual),
                p.iterations,
                p.converged
            )
        })
        .collect();
    dir.write_table("curve.csv", "r,alpha,beta,c,residual,iters,converged", &rows)?;
    for p in res.points.iter().skip(skip) {
        let ok = p.converged && p.residual <= cfg.verify_tol;
        dir.status(&format!("curve r={}", num(p.r)), Status::from_flag(ok));
    }
    if cfg.dump_vectors {
        let rows: Vec<String> = (0..f.n())
            .map(|i| {
                let mut row = num(f.mesh.nodes[i]);
                for p in points.iter() {
                    row.push(',');
                    row.push_str(&num(p.eigenfunction[i]));
                }
                row
            })
            .collect();
        let cols: Vec<String> = (0..points.len()).map(|j| format!("u{j}")).collect();
        dir.write_table("curve_vectors.csv", &format!("x,{}", cols.join(",")), &rows)?;
    }
    if cfg.restarts > 0 {
        let t = Instant::now();
        let runs = randomized_restarts(&f, gap, cfg.restarts, cfg.seed, &opts)?;
        dir.timing("restarts", t.elapsed());
        let rows: Vec<String> = runs
            .iter()
            .enumerate()
            .map(|(i, mp)| format!("{i},{},{},{},{}", num(mp.c), num(mp.grad_norm), mp.sweeps, mp.converged))
            .collect();
        dir.write_table("restarts.csv", "restart,c,grad_norm,sweeps,converged", &rows)?;
        dir.status("restarts", Status::from_flag(runs.iter().all(|mp| mp.converged)));
    }
    Ok(())
}

/// One value per line; `#` starts a comment.
pub fn read_seed(path: &Path, n: usize) -> BoxResult<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    let mut values = Vec::with_capacity(n);
    for (i, line) in text.lines().enumerate() {
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let v: f64 = body
            .parse()
            .map_err(|_| format!("{}:{}: expected a number, found `{body}`", path.display(), i + 1))?;
        values.push(v);
    }
    if values.len() != n {
        return Err(format!("{}: expected {n} values, found {}", path.display(), values.len()).into());
    }
    Ok(values)
}

/// `φ_k` with `λ_k` nearest to `α` on the diagonal, `φ₂` off it.
fn default_seed(f: &FormMatrices<f64>, k: usize, alpha: f64, beta: f64) -> BoxResult<Vec<f64>> {
    let mut pairs = solve_eig(f, k.max(2))?;
    let pick = if (alpha - beta).abs() <= 1e-12 * alpha.abs().max(1.0) {
        (0..pairs.len())
            .min_by(|&i, &j| (pairs[i].lambda - alpha).abs().total_cmp(&(pairs[j].lambda - alpha).abs()))
            .unwrap_or(1)
    } else {
        1
    };
    Ok(pairs.swap_remove(pick).vector)
}

fn verify(cfg: &RunConfig, alpha: f64, beta: f64, seed_file: Option<&Path>, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let seed = match seed_file {
        Some(p) => read_seed(p, f.n())?,
        None => default_seed(&f, cfg.k, alpha, beta)?,
    };
    let t = Instant::now();
    let out = verify_pair_with(&f, alpha, beta, &seed, &NewtonOptions::default())?;
    dir.timing("verify", t.elapsed());
    let ok = out.residual <= cfg.verify_tol;
    dir.write_table(
        "verify.csv",
        "alpha,beta,residual,shift,iterations,within_tol",
        &[format!(
            "{},{},{},{},{},{}",
            num(alpha),
            num(beta),
            num(out.residual),
            num(out.shift),
            out.iterations,
            ok
        )],
    )?;
    println!("residual = {}", num(out.residual));
    dir.status("verify", Status::from_flag(ok));
    Ok(())
}

fn fracexp(cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let t = Instant::now();
    let errs = expansion_error_with(&f, &cfg.s_list, &cfg.quad)?;
    dir.timing("fracexp", t.elapsed());
    let rows: Vec<String> = errs
        .iter()
        .map(|e| format!("{},{},{}", num(e.s), num(e.e_form), num(e.e_eig)))
        .collect();
    dir.write_table("fracexp.csv", "s,e_form,e_eig", &rows)?;
    dir.status("fracexp", Status::Converged);
    Ok(())
}

fn nonres(cfg: &RunConfig, dir: &mut RunDir) -> BoxResult<()> {
    let f = forms(cfg, dir)?;
    let eig = solve_eig(&f, 2)?;
    let lambda1 = eig[0].lambda;
    let r = match cfg.nonres_r {
        AutoOr::Auto => eig[1].lambda - lambda1,
        AutoOr::Value(v) => v,
    };
    let mp_opts = mountain_options(cfg);
    let t = Instant::now();
    let target = trace_curve(&f, &[0.0, r], &mp_opts)?;
    let p = &target.points[1];
    dir.status("nonres target", Status::from_flag(p.converged));
    let (alpha, beta) = (p.alpha, p.beta);
    let th = cfg.nonres_theta;
    let q_plus = (1.0 - th) * lambda1 + th * alpha;
    let q_minus = (1.0 - th) * lambda1 + th * beta;
    let spec = NonlinearitySpec::jumping(f.n(), q_plus, q_minus, cfg.nonres_eps, cfg.nonres_forcing, (alpha, beta));
    let opts = NonresonanceOptions {
        margin: cfg.nonres_margin,
        images: cfg.m,
        grad_tol: cfg.grad_tol,
        polish_below: cfg.polish.then_some(1e-3),
        string: mp_opts.string,
        ..NonresonanceOptions::default()
    };
    let sol = solve_nonresonance(&spec, &f, &opts)?;
    let (d, d_ok) = jump_level(&spec, &f, &mp_opts.string, cfg.m)?;
    dir.timing("nonres", t.elapsed());
    log::info!("J level {d} (converged {d_ok})");

    dir.write_table(
        "nonres.csv",
        "psi,grad_norm,R,norm_u,converged",
        &[format!(
            "{},{},{},{},{}",
            num(sol.psi_value),
            num(sol.grad_norm),
            num(sol.r_scale),
            num(sol.norm_u),
            sol.converged
        )],
    )?;
    dir.write_table(
        "nonres_setup.csv",
        "lambda1,alpha,beta,q_plus,q_minus,eps,forcing,jump_level,jump_converged",
        &[format!(
            "{},{},{},{},{},{},{},{},{}",
            num(lambda1),
            num(alpha),
            num(beta),
            num(q_plus),
            num(q_minus),
            num(cfg.nonres_eps),
            num(cfg.nonres_forcing),
            num(d),
            d_ok
        )],
    )?;
    let rows: Vec<String> = f
        .mesh
        .nodes
        .iter()
        .zip(&sol.u)
        .map(|(&x, &u)| format!("{},{}", num(x), num(u)))
        .collect();
    dir.write_table("nonres_solution.csv", "x,u", &rows)?;
    dir.status("nonres", Status::from_flag(sol.converged));
    dir.status("jump level", Status::from_flag(d_ok && d > 0.0));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_hits_both_ends() {
        let cfg = RunConfig {
            steps: 11,
            ..RunConfig::default()
        };
        let g = r_grid(&cfg, 0.3);
        assert_eq!(g.len(), 11);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[10], 3.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn seed_file_counts_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("seed.txt");
        std::fs::write(&p, "# seed\n1.0\n-2.5 # note\n\n3e-1\n").unwrap();
        assert_eq!(read_seed(&p, 3).unwrap(), vec![1.0, -2.5, 0.3]);
        assert!(read_seed(&p, 4).is_err());
    }
}
