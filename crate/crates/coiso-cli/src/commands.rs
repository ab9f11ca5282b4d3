//! The five commands. Each returns a [`Report`] or an [`InputError`].

use std::sync::Arc;

use coiso::aps::{nijenhuis, projector_annihilating, verify_projector, ProjectorField};
use coiso::expr::{fmt_rational, to_f64, Chart, Rational};
use coiso::exterior::{Form, VectorField};
use coiso::moser::{fiber_homotopy_primitive, moser_flow_verify, reeb_proportionality_check, MoserError, MoserRun};
use coiso::pointwise::{is_coisotropic, Subspace};
use coiso::structures::{
    involutivity_check, reeb_solve_at, validate, GridProvenance, Kind, SampleGrid, Structure, StructureError,
};
use coiso::thicken::{check_vertical, thicken, verify_thickening, ThickenError, ThickeningResult};
use serde_json::{json, Value};

use crate::problem::{parse_problem, InputError, ProblemFile};
use crate::report::{failing, Check, Report, Source};

fn general(e: impl std::fmt::Display) -> InputError {
    InputError::general(e.to_string())
}

fn fmt_point(x: &[Rational]) -> String {
    format!("({})", x.iter().map(fmt_rational).collect::<Vec<_>>().join(", "))
}

/// A constant vector in `d<coordinate>` notation.
fn fmt_vector(chart: &Arc<Chart>, v: &[Rational]) -> String {
    VectorField::constant(chart, v).map(|f| f.to_string()).unwrap_or_else(|_| fmt_point(v))
}

fn describe(r: &mut Report, pf: &ProblemFile) {
    let kind = pf.spec.kind();
    r.set("chart", json!(pf.chart().names()));
    r.set(
        "kind",
        json!(if pf.nondegenerate { kind.nondegenerate_name() } else { kind.name() }),
    );
    let provenance = match pf.grid.provenance() {
        GridProvenance::Explicit => json!("points"),
        GridProvenance::Lattice(axes) => json!({
            "lattice": axes.iter().map(|(lo, hi, n)| json!([fmt_rational(lo), fmt_rational(hi), n])).collect::<Vec<_>>()
        }),
        GridProvenance::Random { seed, count, bound } => {
            json!({"random": {"seed": seed, "count": count, "box": fmt_rational(bound)}})
        }
    };
    r.set("grid", json!({"points": pf.grid.len(), "provenance": provenance}));
}

/// Coordinates spanning the characteristic distribution at every grid point, if it is such a span.
pub fn coordinate_characteristic(pf: &ProblemFile) -> Option<Vec<usize>> {
    let n = pf.chart().dim();
    let first = pf.spec.characteristic_at(pf.grid.points().first()?);
    let idx: Vec<usize> = (0..n)
        .filter(|&i| {
            let mut e = vec![Rational::from_integer(0.into()); n];
            e[i] = Rational::from_integer(1.into());
            first.contains(&e)
        })
        .collect();
    let span = Subspace::coordinate(n, &idx);
    pf.grid
        .points()
        .iter()
        .all(|x| pf.spec.characteristic_at(x).same_as(&span))
        .then_some(idx)
}

fn structure_failure(name: &str, e: StructureError) -> Check {
    Check::on_grid(name, vec![]).failed().detail(json!({"error": e.to_string()}))
}

fn projector_checks(r: &mut Report, pf: &ProblemFile, p: &ProjectorField) -> Result<(), InputError> {
    let rep = verify_projector(p, &pf.grid).map_err(general)?;
    let mut idem = Check::exact("projector_idempotent", rep.idempotent);
    if let Some((row, col, s)) = &rep.offending_entry {
        idem = idem.witness(json!({"row": pf.chart().name(*row), "col": pf.chart().name(*col), "entry": s.to_string()}));
    }
    r.push(idem);
    r.push(Check::on_grid("projector_image", rep.first_bad_image.into_iter().collect()));
    let matches = match check_vertical(&pf.spec, p, &pf.grid) {
        Ok(()) => Check::on_grid("projector_matches_characteristic", vec![]),
        Err(ThickenError::VerticalMismatch { point, vertical }) => {
            let idx = first_point_matching(pf, &point);
            Check::on_grid("projector_matches_characteristic", idx.into_iter().collect())
                .failed()
                .witness(json!({"point": point, "vertical": vertical}))
        }
        Err(e) => return Err(general(e)),
    };
    r.push(matches);
    Ok(())
}

fn first_point_matching(pf: &ProblemFile, shown: &str) -> Option<usize> {
    pf.grid.points().iter().position(|x| fmt_point(x) == shown)
}

fn reeb_membership(r: &mut Report, pf: &ProblemFile) {
    let mut bad = Vec::new();
    let mut witness = None;
    for (i, x) in pf.grid.points().iter().enumerate() {
        let ok = match reeb_solve_at(&pf.spec, x) {
            Ok(fams) => pf.reeb.iter().all(|(label, field)| {
                fams.iter().any(|f| &f.label == label && f.contains(&field.eval_at(x)))
            }),
            Err(_) => false,
        };
        if !ok {
            bad.push(i);
            witness.get_or_insert_with(|| json!({"point": fmt_point(x)}));
        }
    }
    let mut c = Check::on_grid("reeb_membership", bad);
    if let Some(w) = witness {
        c = c.witness(w);
    }
    r.push(c);
}

/// Structure validation, characteristic distribution and involutivity.
pub fn cmd_check(src: &Source) -> Result<Report, InputError> {
    let pf = parse_problem(&src.text)?;
    let mut r = Report::new("check", &[src]);
    describe(&mut r, &pf);
    let spec = &pf.spec;
    let grid = &pf.grid;
    let v = validate(spec, grid).map_err(general)?;
    for c in &v.closedness {
        r.push(Check::exact(format!("closed:{}", c.form), c.closed));
    }
    let dims: Vec<usize> = v.rank_profile.iter().map(|e| e.char_dim).collect();
    let (dmin, dmax) = (dims.iter().copied().min().unwrap_or(0), dims.iter().copied().max().unwrap_or(0));
    let mut ranks = serde_json::Map::new();
    if let Some(first) = v.rank_profile.first() {
        for (k, (name, _)) in first.ranks.iter().enumerate() {
            let rs = v.rank_profile.iter().map(|e| e.ranks[k].1);
            let (lo, hi) = (rs.clone().min().unwrap_or(0), rs.max().unwrap_or(0));
            ranks.insert(name.clone(), json!([lo, hi]));
        }
    }
    r.push(
        Check::on_grid("constant_rank", v.degenerate_points.clone())
            .detail(json!({"characteristic_dim": [dmin, dmax], "ranks": ranks})),
    );
    for a in &v.axioms {
        r.push(Check::on_grid(format!("axiom:{}", a.name), a.failing_points.clone()));
    }
    if pf.nondegenerate {
        let bad = grid
            .points()
            .iter()
            .enumerate()
            .filter(|(_, x)| !spec.nondegenerate_at(x))
            .map(|(i, _)| i)
            .collect();
        r.push(Check::on_grid("nondegenerate", bad).detail(json!({"kind": spec.kind().nondegenerate_name()})));
    }

    let chart = pf.chart();
    let basis: Vec<String> = grid
        .points()
        .first()
        .map(|x| spec.characteristic_at(x).basis().iter().map(|b| fmt_vector(chart, b)).collect())
        .unwrap_or_default();
    r.push(
        Check::on_grid("characteristic_distribution", vec![])
            .optional()
            .detail(json!({"dim": [dmin, dmax], "basis_at_first_point": basis})),
    );
    r.set("characteristic_dim", json!([dmin, dmax]));

    let frame = match &pf.frame {
        Some(f) => {
            let bad = grid
                .points()
                .iter()
                .enumerate()
                .filter(|(_, x)| {
                    let vs: Vec<Vec<Rational>> = f.iter().map(|v| v.eval_at(x)).collect();
                    !Subspace::span(chart.dim(), &vs).same_as(&spec.characteristic_at(x))
                })
                .map(|(i, _)| i)
                .collect();
            r.push(Check::on_grid("frame_spans_characteristic", bad));
            Some(f.clone())
        }
        None => coordinate_characteristic(&pf)
            .map(|idx| idx.iter().map(|&i| VectorField::coordinate(chart, i)).collect::<Vec<_>>()),
    };
    match frame {
        Some(f) if f.is_empty() => r.push(Check::exact("involutivity", true).detail(json!({"frame": []}))),
        Some(f) => {
            let names: Vec<String> = f.iter().map(|v| v.to_string()).collect();
            let c = match involutivity_check(&f, grid) {
                Ok(rep) => {
                    let mut c = Check::on_grid("involutivity", rep.counterexample.iter().map(|ce| ce.point).collect());
                    if let Some(ce) = rep.counterexample {
                        c = c.witness(json!({
                            "point": fmt_point(&grid.points()[ce.point]),
                            "fields": [names[ce.i].clone(), names[ce.j].clone()],
                            "bracket": fmt_vector(chart, &ce.bracket),
                        }));
                    }
                    c
                }
                Err(e) => structure_failure("involutivity", e),
            };
            r.push(c.detail(json!({"frame": names})));
        }
        None => r.push(
            Check::on_grid("involutivity", vec![])
                .failed()
                .optional()
                .detail(json!({"skipped": "the characteristic distribution is not a coordinate span; give `frame = { ... }`"})),
        ),
    }

    if let Some(p) = &pf.projector {
        projector_checks(&mut r, &pf, p)?;
    }
    if !pf.reeb.is_empty() {
        reeb_membership(&mut r, &pf);
    }
    Ok(r)
}

fn on_section_grid(res: &ThickeningResult, base: &SampleGrid) -> Result<SampleGrid, InputError> {
    let pts = base.points().iter().map(|x| res.chart.on_section(x)).collect();
    SampleGrid::explicit(res.chart.total(), pts).map_err(general)
}

/// Base points times the lattice `{−b, 0, b}` in every fiber coordinate.
fn off_section_grid(res: &ThickeningResult, base: &SampleGrid, b: &Rational) -> Result<SampleGrid, InputError> {
    let fibers = res.chart.labels().len();
    let values = [-b.clone(), Rational::from_integer(0.into()), b.clone()];
    let mut combos: Vec<Vec<Rational>> = vec![vec![]];
    for _ in 0..fibers {
        combos = combos
            .into_iter()
            .flat_map(|c| {
                values.iter().map(move |v| {
                    let mut c = c.clone();
                    c.push(v.clone());
                    c
                })
            })
            .collect();
    }
    let mut pts = Vec::with_capacity(base.len() * combos.len());
    for x in base.points() {
        for mu in &combos {
            let mut p = x.clone();
            p.extend(mu.iter().cloned());
            pts.push(p);
        }
    }
    SampleGrid::explicit(res.chart.total(), pts).map_err(general)
}

/// Problem-file text for the thickened structure, with the grid placed on the zero section.
pub fn render_thickened(res: &ThickeningResult, base: &SampleGrid, source_name: &str) -> String {
    let total = res.chart.total();
    let mut out = format!("# thickening of {source_name}\n");
    out.push_str(&format!("chart ({})\n", total.names().join(", ")));
    out.push_str(&format!("kind = {}\n", res.spec_in.kind().nondegenerate_name()));
    for (name, f) in res.spec_out.named_forms() {
        out.push_str(&format!("{name} = {f}\n"));
    }
    out.push_str(&format!("fiber = ({})\n", res.chart.fiber_names().join(", ")));
    match base.provenance() {
        GridProvenance::Lattice(axes) => {
            let mut parts: Vec<String> = axes
                .iter()
                .zip(total.names())
                .map(|((lo, hi, n), name)| format!("{name}: {}..{} : {n}", fmt_rational(lo), fmt_rational(hi)))
                .collect();
            parts.extend(res.chart.fiber_names().iter().map(|name| format!("{name}: 0..0 : 1")));
            out.push_str(&format!("grid = lattice({})\n", parts.join(", ")));
        }
        _ => {
            let pts: Vec<String> = base.points().iter().map(|x| fmt_point(&res.chart.on_section(x))).collect();
            out.push_str(&format!("grid = points({})\n", pts.join(", ")));
        }
    }
    out
}

/// Outcome of `thicken`: the report and the emitted problem file.
#[derive(Debug, Clone)]
pub struct Thickened {
    pub report: Report,
    pub output: String,
}

/// Thickens along `P`, or along the trivial projector when the characteristic
/// distribution is a coordinate span and no `P` is given.
pub fn cmd_thicken(src: &Source) -> Result<Thickened, InputError> {
    let pf = parse_problem(&src.text)?;
    let mut r = Report::new("thicken", &[src]);
    describe(&mut r, &pf);
    let p = match &pf.projector {
        Some(p) => p.clone(),
        None => {
            let idx = coordinate_characteristic(&pf).ok_or_else(|| {
                InputError::general("missing P block, and the characteristic distribution is not a coordinate span")
            })?;
            ProjectorField::trivial(pf.chart(), &idx).map_err(general)?
        }
    };
    let res = thicken(&pf.spec, &p, &pf.grid).map_err(general)?;
    let on = on_section_grid(&res, &pf.grid)?;
    let off = off_section_grid(&res, &pf.grid, &pf.offbox)?;
    let n_zero = nijenhuis(&p).map_err(general)?.is_zero();
    let user = (!pf.reeb.is_empty()).then_some(pf.reeb.as_slice());
    let rep = verify_thickening(&res, &on, &off, n_zero, user).map_err(general)?;

    r.set("kind_out", json!(rep.kind_out));
    r.set("projector", json!(p.to_string()));
    r.set("fiber_coordinates", json!(res.chart.fiber_names()));
    r.set(
        "fiber_labels",
        json!(res.chart.labels().iter().map(|l| res.chart.label_symbol(l)).collect::<Vec<_>>()),
    );
    r.set("theta", json!(res.theta.to_string()));
    let forms: serde_json::Map<String, Value> = res
        .spec_out
        .named_forms()
        .into_iter()
        .map(|(n, f)| (n, json!(f.to_string())))
        .collect();
    r.set("forms", Value::Object(forms));
    r.set("nijenhuis_zero", json!(n_zero));

    r.push(Check::exact("zero_section_pullback", rep.zero_section_pullback));
    for c in &rep.closedness {
        r.push(Check::exact(format!("closed:{}", c.form), c.closed));
    }
    r.push(Check::on_grid("nondegenerate_on_section", failing(&rep.on_section)));
    let mut off_check = Check::on_grid("nondegenerate_off_section", failing(&rep.off_section)).detail(json!({
        "offbox": fmt_rational(&pf.offbox),
        "points": off.len(),
        "nijenhuis_zero": n_zero,
    }));
    off_check.required = rep.off_section_required;
    r.push(off_check);

    let ell = pf.ell.unwrap_or(rep.ell);
    let (cois, witness) = if ell == rep.ell {
        (rep.coisotropic.clone(), rep.coisotropy_witness.clone())
    } else {
        let n = res.chart.total().dim();
        let w = Subspace::coordinate(n, &(0..res.chart.base().dim()).collect::<Vec<_>>());
        let mut per = Vec::new();
        let mut witness = None;
        for (i, x) in on.points().iter().enumerate() {
            let v = is_coisotropic(&w, &res.spec_out.at(x), ell).map_err(general)?;
            if witness.is_none() && !v.coisotropic {
                witness = Some((i, v.witness.clone().unwrap_or_default()));
            }
            per.push(v.coisotropic);
        }
        (per, witness)
    };
    let mut c = Check::on_grid("coisotropic_zero_section", failing(&cois)).detail(json!({"ell": ell}));
    if let Some((i, v)) = witness {
        c = c.witness(json!({"point": fmt_point(&on.points()[i]), "vector": fmt_vector(res.chart.total(), &v)}));
    }
    r.push(c);

    if let Some(ext) = &rep.reeb {
        let mut c = Check::on_grid("reeb_extension", failing(&ext.per_point));
        if let Some(m) = &ext.witness {
            let total = res.chart.total();
            c = c.witness(json!({
                "point": fmt_point(&on.points()[m.point]),
                "label": m.label,
                "thickened": m.thickened.as_ref().map(|v| fmt_vector(total, v)),
                "expected": fmt_vector(total, &m.expected),
            }));
        }
        r.push(c);
    }
    let output = render_thickened(&res, &pf.grid, &src.name);
    Ok(Thickened { report: r, output })
}

/// Exact Nijenhuis tensor of the file's `P`.
pub fn cmd_nijenhuis(src: &Source) -> Result<Report, InputError> {
    let pf = parse_problem(&src.text)?;
    let p = pf
        .projector
        .as_ref()
        .ok_or_else(|| InputError::general("missing P block; nijenhuis needs `P = { z: correction, ... }`"))?;
    let mut r = Report::new("nijenhuis", &[src]);
    describe(&mut r, &pf);
    let n = nijenhuis(p).map_err(general)?;
    r.set("projector", json!(p.to_string()));
    r.set("nijenhuis", json!(n.to_string()));
    let entries: Vec<Value> = n
        .nonzero_entries()
        .into_iter()
        .map(|(a, i, j, c)| {
            json!({
                "vertical": pf.chart().name(a),
                "slots": [n.slot_symbol(i), n.slot_symbol(j)],
                "coefficient": c.to_string(),
            })
        })
        .collect();
    r.set("coefficients", json!(entries));
    r.push(Check::exact("integrable", n.is_zero()).optional());
    let rep = verify_projector(p, &pf.grid).map_err(general)?;
    r.push(Check::exact("projector_idempotent", rep.idempotent));
    if let Some(h) = rep.horizontal_involutivity {
        let mut c = Check::on_grid("horizontal_involutivity", h.counterexample.iter().map(|ce| ce.point).collect()).optional();
        if let Some(ce) = h.counterexample {
            c = c.witness(json!({
                "point": fmt_point(&pf.grid.points()[ce.point]),
                "pair": [ce.i, ce.j],
                "bracket": fmt_vector(pf.chart(), &ce.bracket),
            }));
        }
        r.push(c);
    }
    Ok(r)
}

/// Reeb families on the grid, and the `P(R) = 0` projector for a user choice of `R`.
pub fn cmd_reeb(src: &Source) -> Result<Report, InputError> {
    let pf = parse_problem(&src.text)?;
    let kind = pf.spec.kind();
    if !kind.has_reeb() {
        return Err(InputError::general(format!("kind `{kind}` has no Reeb fields")));
    }
    let mut r = Report::new("reeb", &[src]);
    describe(&mut r, &pf);
    let chart = pf.chart();
    let mut bad = Vec::new();
    let mut families = Vec::new();
    for (i, x) in pf.grid.points().iter().enumerate() {
        match reeb_solve_at(&pf.spec, x) {
            Ok(fams) => families.push(json!({
                "point": fmt_point(x),
                "families": fams.iter().map(|f| json!({
                    "label": f.label,
                    "particular": fmt_vector(chart, &f.particular),
                    "kernel": f.kernel.iter().map(|k| fmt_vector(chart, k)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })),
            Err(_) => {
                bad.push(i);
                families.push(json!({"point": fmt_point(x), "families": null}));
            }
        }
    }
    r.set("families", json!(families));
    r.push(Check::on_grid("reeb_solvable", bad));
    if !pf.reeb.is_empty() {
        reeb_membership(&mut r, &pf);
        let vertical = match &pf.projector {
            Some(p) => Some(p.vertical().to_vec()),
            None => coordinate_characteristic(&pf),
        };
        let fields: Vec<VectorField> = pf.reeb.iter().map(|(_, f)| f.clone()).collect();
        let c = match vertical {
            None => Check::exact("reeb_projector", false)
                .detail(json!({"error": "the characteristic distribution is not a coordinate span"})),
            Some(v) => match projector_annihilating(chart, &v, &fields) {
                Ok(p) => {
                    let kills = fields
                        .iter()
                        .all(|f| p.tensor().apply(f).map(|img| img.is_zero()).unwrap_or(false));
                    r.set("projector", json!(format!("P = {p}")));
                    Check::exact("reeb_projector", kills)
                }
                Err(e) => Check::exact("reeb_projector", false).detail(json!({"error": e.to_string()})),
            },
        };
        r.push(c);
    }
    Ok(r)
}

/// Flags of `moser-verify`.
#[derive(Debug, Clone, PartialEq)]
pub struct MoserOptions {
    pub steps: usize,
    pub tolerance: f64,
    pub box_size: Rational,
    pub samples: usize,
    pub seed: u64,
}

impl Default for MoserOptions {
    fn default() -> Self {
        MoserOptions {
            steps: 1000,
            tolerance: 1e-6,
            box_size: Rational::new(1.into(), 10.into()),
            samples: 20,
            seed: 0,
        }
    }
}

fn forms_of(s: &Structure) -> Vec<Form> {
    match s {
        Structure::PreSymplectic { omega } | Structure::PreMultisymplectic { omega } => vec![omega.clone()],
        Structure::PreContact { eta } => vec![eta.clone()],
        _ => vec![],
    }
}

/// Fiber homotopy primitive, Moser flow and Reeb proportionality for a pair of files.
pub fn cmd_moser(src1: &Source, src2: &Source, opts: &MoserOptions) -> Result<Report, InputError> {
    let pf1 = parse_problem(&src1.text)?;
    let pf2 = parse_problem(&src2.text)?;
    if pf1.chart().names() != pf2.chart().names() {
        return Err(InputError::general("the two files must declare the same chart"));
    }
    let kind = pf1.spec.kind();
    if kind != pf2.spec.kind() {
        return Err(InputError::general(format!("kinds differ: `{kind}` and `{}`", pf2.spec.kind())));
    }
    if opts.steps == 0 || opts.tolerance.is_nan() || opts.tolerance <= 0.0 || opts.samples == 0 {
        return Err(InputError::general("steps, tolerance and samples must be positive"));
    }
    let mut r = Report::new("moser-verify", &[src1, src2]);
    describe(&mut r, &pf1);
    let chart = pf1.chart().clone();
    let fiber = pf1.fiber.clone();
    r.set(
        "fiber",
        json!(fiber.iter().map(|&i| chart.name(i).to_string()).collect::<Vec<_>>()),
    );

    let mut primitives_ok = true;
    if fiber.is_empty() {
        r.set("primitive_note", json!("no fiber coordinates; primitive and flow checks need `fiber = (...)` or `mu...` coordinates"));
    } else {
        for ((name, f1), (_, f2)) in pf1.spec.closed_forms().into_iter().zip(pf2.spec.closed_forms()) {
            if f1.degree() < 2 {
                continue;
            }
            let diff = f2.try_sub(&f1).map_err(general)?;
            let c = match fiber_homotopy_primitive(&diff, &fiber) {
                Ok(p) => Check::exact(format!("primitive:{name}"), p.theta.d() == diff)
                    .detail(json!({"theta": p.theta.to_string()})),
                Err(e) => {
                    primitives_ok = false;
                    Check::exact(format!("primitive:{name}"), false).detail(json!({"error": e.to_string()}))
                }
            };
            r.push(c);
        }
    }

    let flow_supported = matches!(kind, Kind::PreSymplectic | Kind::PreMultisymplectic(_) | Kind::PreContact);
    if !flow_supported {
        r.set("flow_note", json!("flow verification covers symplectic, multisymplectic and contact kinds"));
    } else if kind == Kind::PreContact || (!fiber.is_empty() && primitives_ok) {
        let samples = SampleGrid::random(&chart, opts.seed, opts.samples, opts.box_size.clone()).map_err(general)?;
        let (f1, f2) = (forms_of(pf1.spec.structure()), forms_of(pf2.spec.structure()));
        let box_size = to_f64(&opts.box_size);
        let pts = samples.points().to_vec();
        let run = if kind == Kind::PreContact {
            MoserRun::contact(&f1[0], &f2[0], pts, opts.steps, opts.tolerance, box_size)
        } else {
            MoserRun::closed(&f1[0], &f2[0], &fiber, pts, opts.steps, opts.tolerance, box_size)
        };
        match run {
            Ok(run) => {
                let rep = moser_flow_verify(&run);
                let bad: Vec<usize> = failing(&rep.samples.iter().map(|s| s.pass).collect::<Vec<_>>());
                r.set(
                    "samples",
                    json!(rep
                        .samples
                        .iter()
                        .map(|s| json!({
                            "point": fmt_point(&s.point),
                            "max_error": s.max_error,
                            "pass": s.pass,
                            "aborted_at_t": s.aborted_at_t,
                            "diagnostic": s.diagnostic,
                        }))
                        .collect::<Vec<_>>()),
                );
                r.push(Check::on_grid("moser_flow", bad).detail(json!({
                    "steps": opts.steps,
                    "tolerance": opts.tolerance,
                    "box": fmt_rational(&opts.box_size),
                    "samples": opts.samples,
                    "seed": opts.seed,
                    "max_error": rep.max_error,
                })));
            }
            Err(MoserError::InvalidRun(m)) => return Err(InputError::general(m)),
            Err(e) => r.push(Check::on_grid("moser_flow", vec![]).failed().detail(json!({"error": e.to_string()}))),
        }
    }

    if kind.has_reeb() {
        let c = match reeb_proportionality_check(&pf1.spec, &pf2.spec, &pf1.grid) {
            Ok(rep) => {
                let mut c = Check::on_grid("reeb_proportional", failing(&rep.per_point));
                if let Some((i, label)) = rep.witness {
                    c = c.witness(json!({"point": fmt_point(&pf1.grid.points()[i]), "label": label}));
                }
                c
            }
            Err(e) => Check::on_grid("reeb_proportional", vec![]).failed().detail(json!({"error": e.to_string()})),
        };
        r.push(c);
    }
    Ok(r)
}
