use std::io::{BufRead, Write};
use std::path::PathBuf;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use colloquy_core::bus::{DialogBus, ServiceHost};
use colloquy_core::fixtures;
use colloquy_core::signals::{EmotionPrediction, Engagement};
use colloquy_core::simulation::{run_evaluation, train_rl, EvalConfig, Harness, PolicyKind, Route, TrainConfig};
use colloquy_core::system::{AssembledSystem, Conversation, Placement};
use colloquy_gateway::{AppState, SessionConfig};

#[derive(Parser)]
#[command(name = "colloquy", version, about = "Multi-domain dialog systems on a publish/subscribe bus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP/WebSocket session gateway.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
    },
    /// Talk to a dialog system on the terminal.
    Chat {
        #[command(flatten)]
        system: SystemArgs,
        /// Reach the services selected by --remote on this host instead of
        /// starting them locally.
        #[arg(long)]
        connect: Option<String>,
    },
    /// Run simulated dialogs and report success rate, turns and reward.
    Evaluate(EvaluateArgs),
    /// Train a Q-network policy against the simulated user.
    Train {
        /// Training configuration as JSON; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the trained network.
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the service graph of a system in DOT syntax.
    Graph {
        #[command(flatten)]
        system: SystemArgs,
    },
    /// Serve some of a system's services to a remote bus.
    Host {
        #[arg(long, default_value = "127.0.0.1:7700")]
        bind: String,
        /// Service names or prefixes to host, e.g. `nlu,nlg`.
        #[arg(long, value_delimiter = ',', required = true)]
        services: Vec<String>,
        #[command(flatten)]
        system: SystemArgs,
    },
}

#[derive(Args, Clone)]
struct SystemArgs {
    #[arg(long, value_delimiter = ',', default_value = "mensa,weather")]
    domains: Vec<String>,
    /// Adapt phrasing to emotion and engagement (set with `/social` in chat).
    #[arg(long)]
    affective: bool,
    /// Disable answers from the bundled knowledge base.
    #[arg(long)]
    no_kb: bool,
    /// Services to run out of process, e.g. `nlu,policy`.
    #[arg(long, value_delimiter = ',')]
    remote: Vec<String>,
}

impl SystemArgs {
    fn config(&self) -> SessionConfig {
        SessionConfig {
            domains: self.domains.clone(),
            affective: self.affective,
            knowledge_base: !self.no_kb,
            remote: self.remote.clone(),
        }
    }
}

#[derive(Args)]
struct EvaluateArgs {
    /// Evaluation configuration as JSON; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    dialogs: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Evaluate this trained network instead of the handcrafted policy.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Exchange text through NLU and NLG rather than dialog acts.
    #[arg(long)]
    text: bool,
    /// Call the components directly instead of running each dialog on a bus.
    #[arg(long)]
    direct: bool,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    remote: Vec<String>,
    /// Write per-dialog records and metrics as JSON.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write per-dialog records as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match Cli::parse().command {
        Command::Serve { addr } => serve(&addr),
        Command::Chat { system, connect } => chat(&system, connect.as_deref()),
        Command::Evaluate(args) => evaluate(args),
        Command::Train { config, episodes, seed, out } => train(config, episodes, seed, &out),
        Command::Graph { system } => graph(&system),
        Command::Host { bind, services, system } => host(&bind, services, &system),
    }
}

fn serve(addr: &str) -> Result<()> {
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await.with_context(|| format!("binding {addr}"))?;
        log::info!("gateway listening on http://{}", listener.local_addr()?);
        tokio::select! {
            r = colloquy_gateway::serve(listener, AppState::new()) => r.context("server stopped"),
            _ = tokio::signal::ctrl_c() => Ok(()),
        }
    })
}

fn build(system: &SystemArgs, connect: Option<&str>) -> Result<AssembledSystem> {
    let builder = system.config().builder()?;
    let Some(addr) = connect else {
        return Ok(builder.build()?);
    };
    if system.remote.is_empty() {
        bail!("--connect needs --remote to say which services live on the host");
    }
    let (entries, placement) = builder.services()?;
    let mut bus = DialogBus::new();
    for (descriptor, service) in entries {
        if !placement.is_remote(&descriptor.name) {
            bus.register_boxed(descriptor, service)?;
        }
    }
    bus.connect_remote(addr, 5000).with_context(|| format!("connecting to {addr}"))?;
    Ok(AssembledSystem::from_bus(bus))
}

fn chat(system: &SystemArgs, connect: Option<&str>) -> Result<()> {
    let mut convo = Conversation::new(build(system, connect)?, system.affective);
    let print = |lines: &[String]| lines.iter().for_each(|l| println!("system> {l}"));
    print(&convo.start()?.utterances);
    let stdin = std::io::stdin();
    let mut line = String::new();
    while !convo.is_ended() {
        print!("you> ");
        std::io::stdout().flush()?;
        line.clear();
        if stdin.lock().read_line(&mut line)? == 0 {
            break;
        }
        let text = line.trim();
        if let Some(rest) = text.strip_prefix("/social") {
            match parse_social(rest) {
                Ok((emotion, engagement)) => convo.set_social(emotion, engagement),
                Err(e) => eprintln!("{e}"),
            }
            continue;
        }
        if text == "/quit" {
            break;
        }
        print(&convo.say(text)?.utterances);
    }
    convo.finish();
    Ok(())
}

/// `<valence> <arousal> <emotion> <engagement>`
fn parse_social(args: &str) -> Result<(EmotionPrediction, Engagement)> {
    let parts: Vec<&str> = args.split_whitespace().collect();
    let [valence, arousal, emotion, engagement] = parts[..] else {
        bail!("usage: /social <valence> <arousal> <emotion> <engagement>");
    };
    let prediction = EmotionPrediction::new(emotion.parse()?, valence.parse()?, arousal.parse()?);
    Ok((prediction, engagement.parse()?))
}

fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => EvalConfig::load(path)?,
        None => EvalConfig::default(),
    };
    if let Some(n) = args.dialogs {
        cfg.n_dialogs = n;
    }
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    if let Some(model) = args.model {
        cfg.policy = PolicyKind::Rl { model };
    }
    if args.text {
        cfg.route = Route::Text;
    }
    if args.direct {
        cfg.over_bus = false;
    }
    if let Some(t) = args.threads {
        cfg.threads = t;
    }
    if !args.remote.is_empty() {
        cfg.remote = args.remote;
    }
    let harness = Harness::reference(&cfg)?;
    let report = run_evaluation(&harness, &cfg)?;
    println!("{}", serde_json::to_string_pretty(&report.metrics)?);
    if let Some(path) = args.json {
        report.write_json(&path).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = args.csv {
        report.write_csv(&path).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn train(config: Option<PathBuf>, episodes: Option<usize>, seed: Option<u64>, out: &std::path::Path) -> Result<()> {
    let mut cfg: TrainConfig = match config {
        Some(path) => serde_json::from_str(&std::fs::read_to_string(&path)?)?,
        None => TrainConfig::default(),
    };
    if let Some(e) = episodes {
        cfg.episodes = e;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let (policy, report) = train_rl(Arc::new(fixtures::mensa_database()), &cfg)?;
    policy.network().save(out).with_context(|| format!("writing {}", out.display()))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

fn graph(system: &SystemArgs) -> Result<()> {
    let config = SessionConfig { remote: Vec::new(), ..system.config() };
    let assembled = config.builder()?.build()?;
    print!("{}", assembled.bus.draw_graph().to_dot());
    assembled.shutdown();
    Ok(())
}

fn host(bind: &str, services: Vec<String>, system: &SystemArgs) -> Result<()> {
    let (entries, _) = system.config().builder()?.services()?;
    let placement = Placement::remote_prefixes(services);
    let mut host = ServiceHost::new();
    let mut names = Vec::new();
    for (descriptor, service) in entries {
        if placement.is_remote(&descriptor.name) {
            names.push(descriptor.name.clone());
            host.add_boxed(descriptor, service)?;
        }
    }
    if names.is_empty() {
        bail!("no service matches the requested names");
    }
    let handle = host.spawn(bind)?;
    log::info!("hosting {} on {}", names.join(", "), handle.local_addr());
    handle.join()?;
    Ok(())
}
