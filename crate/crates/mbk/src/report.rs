//! Human-readable reports. Variables print 1-based, levels 0-based.

use std::fmt::Write as _;

use mbk_core::bases::{MarkovBasis, OrbitAnnotatedBasis, Verification};
use mbk_core::chordal::{
    boundary_cliques, clique_tree, elimination_variable_order, independence_graph, is_chordal, is_decomposable,
    maximal_cliques, CliqueTree,
};
use mbk_core::fiber2::{FiberKey, Uniqueness};
use mbk_core::groebner::{GroebnerReport, Rule, TermOrder};
use mbk_core::{ModelSpec, VarSet};

use crate::CliError;

pub fn set(s: VarSet) -> String {
    let items: Vec<String> = s.iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

fn sets(list: impl IntoIterator<Item = VarSet>) -> String {
    let items: Vec<String> = list.into_iter().map(set).collect();
    if items.is_empty() {
        "none".into()
    } else {
        items.join(" ")
    }
}

pub fn analyze(out: &mut String, model: &ModelSpec) -> Result<(), CliError> {
    let levels: Vec<String> = model.levels().iter().map(u32::to_string).collect();
    let _ = writeln!(out, "variables: {} (levels {})", model.num_vars(), levels.join(" "));
    let _ = writeln!(out, "facets: {}", sets(model.facets().iter().copied()));
    let g = independence_graph(model);
    let edges: Vec<String> = g.edges().iter().map(|(a, b)| format!("{}-{}", a + 1, b + 1)).collect();
    let _ = writeln!(out, "independence graph: {}", if edges.is_empty() { "no edges".into() } else { edges.join(" ") });
    let chordal = is_chordal(&g);
    let _ = writeln!(out, "chordal: {}", if chordal { "yes" } else { "no" });
    let _ = writeln!(out, "decomposable: {}", if is_decomposable(model) { "yes" } else { "no" });
    if !chordal {
        return Ok(());
    }
    let _ = writeln!(out, "cliques: {}", sets(maximal_cliques(&g)?));
    let tree = clique_tree(&g)?;
    let _ = writeln!(out, "separators: {}", sets(tree.separators()));
    tree_line(out, &tree);
    let _ = writeln!(out, "boundary cliques:");
    for bc in boundary_cliques(&g)? {
        let _ = writeln!(
            out,
            "  {} simplicial {} separator {}",
            set(bc.clique),
            set(bc.simplicial),
            set(bc.separator)
        );
    }
    let order: Vec<String> = elimination_variable_order(&g)?.iter().map(|v| (v + 1).to_string()).collect();
    let _ = writeln!(out, "elimination order: {}", order.join(" "));
    Ok(())
}

pub fn tree_line(out: &mut String, tree: &CliqueTree) {
    let cl = tree.cliques();
    let edges: Vec<String> = tree.edges().iter().map(|&(a, b)| format!("{}-{}", set(cl[a]), set(cl[b]))).collect();
    let _ = writeln!(out, "clique tree: {}", if edges.is_empty() { set(cl[0]) } else { edges.join(" ") });
}

pub fn dot(out: &mut String, tree: &CliqueTree) {
    out.push_str("graph clique_tree {\n");
    for (k, &c) in tree.cliques().iter().enumerate() {
        let _ = writeln!(out, "  c{k} [label=\"{}\"];", set(c));
    }
    for (&(a, b), s) in tree.edges().iter().zip(tree.separators()) {
        let _ = writeln!(out, "  c{a} -- c{b} [label=\"{}\"];", set(s));
    }
    out.push_str("}\n");
}

pub fn fibers(out: &mut String, keys: &[FiberKey]) {
    let _ = writeln!(out, "{} fibers", keys.len());
    for (k, key) in keys.iter().enumerate() {
        let comps = sets(key.components().iter().map(|c| c.vars));
        let _ = writeln!(
            out,
            "fiber {}: nondegenerate {} components {} ({}) size {}",
            k + 1,
            set(key.nondegenerate()),
            key.component_count(),
            comps,
            key.fiber_size()
        );
        for m in key.members() {
            let _ = writeln!(out, "  {m:?}");
        }
    }
}

pub fn basis(out: &mut String, title: &str, basis: &MarkovBasis) {
    let _ = writeln!(out, "{title}: {} moves", basis.len());
    for z in basis.moves() {
        let _ = writeln!(out, "  {z:?}");
    }
}

pub fn orbits(out: &mut String, inv: &OrbitAnnotatedBasis) {
    let total: usize = inv.orbits.iter().map(|o| o.members.len()).sum();
    let _ = writeln!(out, "minimal invariant Markov basis: {} orbits, {total} moves", inv.orbits.len());
    for (k, o) in inv.orbits.iter().enumerate() {
        let _ = writeln!(
            out,
            "orbit {}: nondegenerate {} generator {:?} size {}",
            k + 1,
            set(o.fiber.nondegenerate()),
            o.generator,
            o.members.len()
        );
        let _ = writeln!(out, "  {:?}", o.representative);
    }
}

pub fn term_order(out: &mut String, ord: &TermOrder) {
    let vars: Vec<String> = ord.variable_order().iter().map(|v| (v + 1).to_string()).collect();
    let rule = match ord.rule() {
        Rule::RevLex => "reverse lexicographic",
        Rule::Lex => "lexicographic",
    };
    let _ = writeln!(out, "term order: {rule}, variables by significance {}", vars.join(" "));
}

pub fn groebner_check(out: &mut String, rep: &GroebnerReport) {
    for d in &rep.per_degree {
        let _ = writeln!(out, "degree {}: {} fibers, {} tables", d.degree, d.fibers, d.tables);
    }
    match &rep.counterexample {
        None => out.push_str("PASS\n"),
        Some(c) => {
            let _ = writeln!(
                out,
                "FAIL: {:?} reduces to {:?}, fiber minimum {:?}",
                c.table, c.normal_form, c.minimum
            );
        }
    }
}

pub fn uniqueness(out: &mut String, u: &Uniqueness) {
    if !u.nonunique {
        out.push_str("unique\n");
        return;
    }
    out.push_str("non-unique\n");
    if let Some([a, b, c]) = u.witness {
        let _ = writeln!(
            out,
            "witness: variables {} {} {} are pairwise non-adjacent; their degree-two fiber has three components and 4 members",
            a + 1,
            b + 1,
            c + 1
        );
    }
}

pub fn verification(out: &mut String, moves: usize, v: &Verification) {
    let _ = writeln!(
        out,
        "{moves} moves, {} fibers checked up to degree {}",
        v.fibers_checked, v.degree
    );
    match &v.witness {
        None => out.push_str("PASS\n"),
        Some(w) => {
            let _ = writeln!(
                out,
                "FAIL: a degree {} fiber with {} members splits into {} components",
                w.degree,
                w.members.len(),
                w.components
            );
            for m in &w.members {
                let _ = writeln!(out, "  {m:?}");
            }
        }
    }
}
