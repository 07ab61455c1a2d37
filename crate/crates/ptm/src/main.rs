use clap::{error::ErrorKind, Parser, Subcommand};

use ptm::cli;

/// Parsimonious topic models: train, select the model order, evaluate, and
/// compare against an LDA baseline.
#[derive(Parser)]
#[command(name = "ptm", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit a model at a fixed number of topics.
    Train(cli::TrainArgs),
    /// Top-down order sweep; keeps the minimum-objective model.
    Sweep(cli::SweepArgs),
    /// Evaluate a trained model: held-out likelihood, coherence, sparsity,
    /// label consistency.
    Eval(cli::EvalArgs),
    /// Train the LDA baseline.
    Lda(cli::LdaArgs),
    /// Generate a synthetic corpus with known ground truth.
    Synth(cli::SynthArgs),
    /// Print the top words of each topic.
    Topics(cli::TopicsArgs),
}

fn threads_of(command: &Command) -> usize {
    match command {
        Command::Train(a) => a.opts.threads,
        Command::Sweep(a) => a.opts.threads,
        Command::Eval(a) => a.opts.threads,
        Command::Lda(a) => a.opts.threads,
        Command::Synth(a) => a.opts.threads,
        Command::Topics(_) => 0,
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Version/help requests are successes; anything else is a
            // usage error.
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            std::process::exit(code);
        }
    };

    let threads = threads_of(&cli.command);
    if threads > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let result = match cli.command {
        Command::Train(args) => cli::cmd_train(&args).map(|s| {
            println!(
                "fitted {} (restart {} of {}), final objective {:.4}",
                s.model_path.display(),
                s.best_restart,
                s.restart_totals.len(),
                s.final_bic.total
            );
        }),
        Command::Sweep(args) => cli::cmd_sweep(&args).map(|s| {
            println!("selected {} topics; best model at {}", s.m_star, s.model_path.display());
        }),
        Command::Eval(args) => cli::cmd_eval(&args).map(|s| {
            println!("{}", cli::EvalSummary::csv_header());
            println!("{}", s.csv_row());
        }),
        Command::Lda(args) => cli::cmd_lda(&args).map(|s| {
            if s.eta_reverts > 0 {
                eprintln!("warning: {} Newton update(s) on eta reverted", s.eta_reverts);
            }
            println!(
                "trained {} in {} iterations, bound {:.4}",
                s.model_path.display(),
                s.iterations,
                s.final_elbo
            );
        }),
        Command::Synth(args) => cli::cmd_synth(&args).map(|path| {
            println!("wrote {}", path.display());
        }),
        Command::Topics(args) => cli::cmd_topics(&args).map(|out| {
            print!("{out}");
        }),
    };

    if let Err(err) = result {
        eprintln!("error: {err}");
        std::process::exit(err.exit_code());
    }
}
