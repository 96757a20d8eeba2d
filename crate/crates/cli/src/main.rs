//! `gdf`: command-line front end for graph divisors of GDF surfaces.
//!
//! Exit status: 0 when a question is decided positively or an object is
//! constructed, 1 for a negative decision (the reason is printed), 2 for
//! unusable input.

use std::fs;
use std::path::Path;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use gdf_core::config::{
    self, aut_vector_group_report, barycentric_slice, config_space_dim, moduli_dim, Configuration,
};
use gdf_core::cylinder::{
    bushify, cylinder_canonical_invariant, cylinders_isomorphic_fiberwise,
    cylinders_isomorphic_over_b, stretch, stretch_type_law_check, Decision, StretchSpec,
};
use gdf_core::divisors::{df_quotient, pic_rank_excess, type_divisor, GraphDivisor};
use gdf_core::models::{
    accompanying_sequence, spring_counts, spring_model, spring_q, surface_equations,
    verify_fiber_structure,
};
use gdf_core::rational::{format_rat, parse_rat};
use gdf_core::tree::{aut_group, gizatullin_tree, RootedTree, TreeType};
use gdf_core::Rat;

#[derive(Parser)]
#[command(
    name = "gdf",
    version,
    about = "Graph divisors, cylinders and moduli of GDF surfaces"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Arguments naming inputs accept a file path or the literal content.
#[derive(Subcommand)]
enum Command {
    /// Type (n_0, ..., n_h) of a tree.
    Tp { tree: String },
    /// Automorphism group orders of a tree.
    Aut { tree: String },
    /// Replace every fiber tree by the bush of the same type.
    Bushify { divisor: String },
    /// Gizatullin tree of a type such as (0,2,1,2).
    Giz { tree_type: String },
    /// Danielewski-Fieseler quotient and type divisor.
    Typediv { divisor: String },
    /// Decide whether two cylinders are isomorphic over the base.
    Cyliso {
        x: String,
        y: String,
        /// Also allow the listed base automorphisms.
        #[arg(long)]
        fiberwise: bool,
    },
    /// Insert chains of lengths A = a_1,...,a_n below the roots.
    Stretch {
        divisor: String,
        /// Comma-separated non-negative integers.
        a: String,
        /// Require A to be principal.
        #[arg(long)]
        principal: bool,
        /// Verify the type-divisor law and exit 1 if it fails.
        #[arg(long)]
        check_law: bool,
    },
    /// Canonical invariant of the cylinder over the base.
    Canon { divisor: String },
    /// Accompanying sequence, equations and fiber-structure report.
    Model {
        divisor_or_tree: String,
        /// Comma-separated rational roots, one per branch.
        #[arg(long)]
        roots: Option<String>,
        /// Treat the tree as a spring bush.
        #[arg(long)]
        spring: bool,
        /// Marked point to use for a divisor (0-based).
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// Target level of the bush model.
        #[arg(long)]
        level: Option<usize>,
    },
    /// Dimension of the configuration space.
    Configdim { divisor: String },
    /// Test whether two configurations lie in one orbit.
    Orbiteq {
        divisor: String,
        s1: String,
        s2: String,
    },
    /// Barycentric slice of a configuration.
    Slice { divisor: String, s: String },
    /// Order d of the scalar stabilizer.
    Stab { divisor: String, s: String },
    /// Dimension of the moduli space, with the vector-group divisors.
    Modulidim { divisor: String },
    /// Centers of the modifications encoded by a configuration.
    Centers { divisor: String, s: String },
}

struct Outcome {
    status: u8,
    json: Value,
    text: String,
}

impl Outcome {
    fn ok(json: Value, text: impl Into<String>) -> Self {
        Self {
            status: 0,
            json,
            text: text.into(),
        }
    }

    fn negative(json: Value, text: impl Into<String>) -> Self {
        Self {
            status: 1,
            json,
            text: text.into(),
        }
    }
}

fn read_input(arg: &str) -> Result<String> {
    let p = Path::new(arg);
    if p.is_file() {
        fs::read_to_string(p).with_context(|| format!("reading {arg}"))
    } else {
        Ok(arg.to_owned())
    }
}

fn parse_json(arg: &str) -> Result<Value> {
    let text = read_input(arg)?;
    serde_json::from_str(&text).map_err(|e| {
        anyhow!(
            "{}: line {}, column {}: {e}",
            if Path::new(arg).is_file() {
                arg
            } else {
                "<inline>"
            },
            e.line(),
            e.column()
        )
    })
}

fn load_tree(arg: &str) -> Result<RootedTree> {
    Ok(RootedTree::parse_any(&read_input(arg)?)?)
}

/// A graph divisor file, or a bare tree over a one-point affine line.
fn load_divisor(arg: &str) -> Result<GraphDivisor> {
    let text = read_input(arg)?;
    let trimmed = text.trim_start();
    if trimmed.starts_with('{') {
        let v = parse_json(arg)?;
        if v.get("base").is_some() {
            return Ok(GraphDivisor::from_json(&v)?);
        }
    }
    Ok(GraphDivisor::single(RootedTree::parse_any(&text)?))
}

fn load_config(arg: &str, d: &GraphDivisor) -> Result<Configuration> {
    Ok(Configuration::from_json(&parse_json(arg)?, d)?)
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let s = s.trim().trim_start_matches('[').trim_end_matches(']');
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|x| f(x.trim().trim_matches('"')))
        .collect()
}

fn rats(v: &[Rat]) -> Vec<String> {
    v.iter().map(format_rat).collect()
}

fn run(cmd: Command) -> Result<Outcome> {
    Ok(match cmd {
        Command::Tp { tree } => {
            let t = load_tree(&tree)?;
            let tp = t.tree_type();
            let mut j = json!({
                "type": tp.to_string(),
                "counts": tp.counts(),
                "height": t.height(),
                "leaf_levels": t.leaves_with_levels(),
            });
            if t.len() == 1 {
                j["note"] =
                    json!("single-vertex tree: the root counts as the unique component on level 0");
            }
            Outcome::ok(j, tp.to_string())
        }
        Command::Aut { tree } => {
            let t = load_tree(&tree)?;
            let g = aut_group(&t);
            let j = json!({
                "order": g.order.to_string(),
                "kernel_order": g.kernel_order.to_string(),
                "star_order": g.star_order.to_string(),
                "star": g.star.to_nested(),
                "generators": g.generators.iter().map(|a| a.map.clone()).collect::<Vec<_>>(),
            });
            let text = format!(
                "|Aut| = {}, |K| = {}, |Aut*| = {}",
                g.order, g.kernel_order, g.star_order
            );
            Outcome::ok(j, text)
        }
        Command::Bushify { divisor } => {
            let d = bushify(&load_divisor(&divisor)?);
            let text = d
                .trees()
                .iter()
                .map(|t| format!("{t}\n"))
                .collect::<String>();
            let mut j = d.to_json();
            j["note"] = json!("each tree replaced by the bush of its type; type divisors agree, so the cylinder is unchanged");
            Outcome::ok(j, text.trim_end())
        }
        Command::Giz { tree_type } => {
            let tt: TreeType = tree_type.parse()?;
            let t = gizatullin_tree(&tt)?;
            Outcome::ok(
                json!({"type": tt.to_string(), "tree": t.to_nested()}),
                t.to_nested(),
            )
        }
        Command::Typediv { divisor } => {
            let d = load_divisor(&divisor)?;
            let q = df_quotient(&d);
            let td = type_divisor(&d);
            let rho = pic_rank_excess(&d);
            let j = json!({
                "points": d.base().points(),
                "counts": q.counts(),
                "levels": td.levels,
                "coefficients": td.coefficients(),
                "rho": rho,
                "components": q.points,
            });
            let text = d
                .base()
                .points()
                .iter()
                .zip(td.sorted())
                .map(|(p, l)| format!("{p}: {l:?}\n"))
                .collect::<String>()
                + &format!("rho = {rho}");
            Outcome::ok(j, text)
        }
        Command::Cyliso { x, y, fiberwise } => {
            let (dx, dy) = (load_divisor(&x)?, load_divisor(&y)?);
            let scope = "bijections of components are taken as admissible; base symmetries searched: identity and the listed automorphisms";
            if fiberwise {
                match cylinders_isomorphic_fiberwise(&dx, &dy)? {
                    Some(m) => {
                        let mut j = Decision::Isomorphic(m.certificate.clone()).to_json();
                        j["perm"] = json!(m.perm.iter().map(|x| x + 1).collect::<Vec<_>>());
                        j["scope"] = json!(scope);
                        let text = format!(
                            "isomorphic via base permutation {:?}, shift {:?}",
                            m.perm.iter().map(|x| x + 1).collect::<Vec<_>>(),
                            m.certificate.shift
                        );
                        Outcome::ok(j, text)
                    }
                    None => Outcome::negative(
                        json!({"isomorphic": false, "reason": "no-base-permutation", "scope": scope}),
                        "not isomorphic: no listed base permutation works",
                    ),
                }
            } else {
                let dec = cylinders_isomorphic_over_b(&dx, &dy)?;
                let j = dec.to_json();
                match &dec {
                    Decision::Isomorphic(c) => {
                        Outcome::ok(j, format!("isomorphic, shift {:?}", c.shift))
                    }
                    Decision::NotIsomorphic { reason, point } => {
                        let at = point
                            .map(|p| format!(" at point {}", dx.base().points()[p]))
                            .unwrap_or_default();
                        Outcome::negative(j, format!("not isomorphic: {}{at}", reason.as_str()))
                    }
                }
            }
        }
        Command::Stretch {
            divisor,
            a,
            principal,
            check_law,
        } => {
            let d = load_divisor(&divisor)?;
            let a = parse_list(&a, |x| {
                x.parse::<i64>()
                    .map_err(|e| anyhow!("bad entry {x:?} in A: {e}"))
            })?;
            let spec = StretchSpec::new(a, principal)?;
            let out = stretch(&d, &spec)?;
            let mut j = out.to_json();
            let text = out
                .trees()
                .iter()
                .map(|t| format!("{t}\n"))
                .collect::<String>();
            if check_law {
                let holds = stretch_type_law_check(&d, &spec)?;
                j["law_holds"] = json!(holds);
                if !holds {
                    return Ok(Outcome::negative(j, "type-divisor law violated"));
                }
            }
            Outcome::ok(j, text.trim_end())
        }
        Command::Canon { divisor } => {
            let d = load_divisor(&divisor)?;
            let rec = cylinder_canonical_invariant(&d)?;
            let text = format!("{:?}", rec.levels);
            Outcome::ok(json!({"levels": rec.levels}), text)
        }
        Command::Model {
            divisor_or_tree,
            roots,
            spring,
            point,
            level,
        } => {
            let d = load_divisor(&divisor_or_tree)?;
            let t = d
                .trees()
                .get(point)
                .ok_or_else(|| anyhow!("divisor has no point {point}"))?
                .clone();
            let roots = roots
                .map(|r| parse_list(&r, |x| Ok(parse_rat(x)?)))
                .transpose()?;
            if spring {
                let truncated = t.truncate(t.height().saturating_sub(1));
                let seq = accompanying_sequence(&truncated, roots.as_deref())?;
                let sd = spring_q(&t, &seq, None, None)?;
                let model = spring_model(&sd, &seq)?;
                let counts = spring_counts(&t, &sd);
                let rep = verify_fiber_structure(&seq);
                let j = json!({
                    "sequence": seq.to_json(),
                    "spring": sd.to_json(),
                    "model": model.to_json(),
                    "counts": counts,
                    "report": rep,
                });
                let text = model.to_text().trim_end().to_owned();
                if rep.all_passed() && counts.consistent() {
                    Outcome::ok(j, text)
                } else {
                    Outcome::negative(j, format!("{text}\nfiber-structure checks failed"))
                }
            } else {
                let seq = accompanying_sequence(&t, roots.as_deref())?;
                let model = surface_equations(&seq, level)?;
                let rep = verify_fiber_structure(&seq);
                let j = json!({"sequence": seq.to_json(), "model": model.to_json(), "report": rep});
                let mut text = String::new();
                for i in 1..=seq.m {
                    text += &format!("p_{i} = {}\nr_{i} = {}\n", seq.p(i), seq.r(i));
                }
                text += &model.to_text();
                if rep.all_passed() {
                    Outcome::ok(j, text.trim_end())
                } else {
                    Outcome::negative(j, format!("{text}fiber-structure checks failed"))
                }
            }
        }
        Command::Configdim { divisor } => {
            let n = config_space_dim(&load_divisor(&divisor)?);
            Outcome::ok(json!({"dim": n}), n.to_string())
        }
        Command::Orbiteq { divisor, s1, s2 } => {
            let d = load_divisor(&divisor)?;
            let (a, b) = (load_config(&s1, &d)?, load_config(&s2, &d)?);
            match config::orbit_equivalent(&a, &b, &d)? {
                Some(g) => Outcome::ok(
                    json!({"equivalent": true, "element": g.to_json(&d)}),
                    format!("equivalent, alpha = {}", format_rat(&g.alpha)),
                ),
                None => Outcome::negative(json!({"equivalent": false}), "not equivalent"),
            }
        }
        Command::Slice { divisor, s } => {
            let d = load_divisor(&divisor)?;
            let c = load_config(&s, &d)?;
            let v = config::validate_configuration(&c, &d);
            if !v.valid {
                bail!("invalid configuration: {}", v.diagnostics.join("; "));
            }
            let (sl, shifts) = barycentric_slice(&c, &d);
            let shifts: Vec<Vec<String>> = shifts.iter().map(|b| rats(b)).collect();
            let j = json!({"slice": sl.to_json(&d), "shifts": shifts});
            Outcome::ok(j.clone(), serde_json::to_string(&j["slice"])?)
        }
        Command::Stab { divisor, s } => {
            let d = load_divisor(&divisor)?;
            let st = config::mu_d_stabilizer(&load_config(&s, &d)?, &d)?;
            let text = match st.d {
                Some(k) => format!("d = {k}"),
                None => "d = infinite".to_owned(),
            };
            let j = json!({
                "d": st.d,
                "infinite": st.d.is_none(),
                "geometric_d": st.geometric_d,
                "note": st.note,
            });
            Outcome::ok(j, text)
        }
        Command::Modulidim { divisor } => {
            let d = load_divisor(&divisor)?;
            let report = aut_vector_group_report(&d);
            match moduli_dim(&d) {
                Ok(n) => Outcome::ok(
                    json!({"dim": n, "edges": d.num_edges(), "h": d.total_height(), "vector_groups": report}),
                    n.to_string(),
                ),
                Err(gdf_core::Error::Refused(why)) => Outcome::negative(
                    json!({"dim": Value::Null, "reason": "units-nontrivial", "detail": why}),
                    format!("refused: {why}"),
                ),
                Err(e) => return Err(e.into()),
            }
        }
        Command::Centers { divisor, s } => {
            let d = load_divisor(&divisor)?;
            let c = load_config(&s, &d)?;
            let centers = config::modification_centers(&d, &c)?;
            let text = centers
                .levels
                .iter()
                .enumerate()
                .map(|(l, cs)| {
                    let pts: Vec<String> = cs
                        .iter()
                        .map(|c| format!("{}->{}@{}", c.vertex, c.child, format_rat(&c.coord)))
                        .collect();
                    format!("level {l}: {}\n", pts.join(" "))
                })
                .collect::<String>();
            Outcome::ok(serde_json::to_value(&centers)?, text.trim_end())
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.format;
    match run(cli.command) {
        Ok(out) => {
            match format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&out.json).expect("json"))
                }
                Format::Text => println!("{}", out.text),
            }
            ExitCode::from(out.status)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
