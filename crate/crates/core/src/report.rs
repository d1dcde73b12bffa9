//! Markdown and HTML rendering of a requirements model in If / occurs, then /
//! holds prose.

use std::fmt::Write as _;

use crate::req::text::expr_to_string;
use crate::req::{
    Effect, Expr, ModeQuery, Requirement, RequirementsModel, Response, Template, TimePoint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Html,
}

impl Format {
    pub fn parse(s: &str) -> Option<Format> {
        match s {
            "md" | "markdown" => Some(Format::Markdown),
            "html" => Some(Format::Html),
            _ => None,
        }
    }
}

/// One line of a rendered requirement: a keyword column and a phrase column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub keyword: String,
    pub phrase: String,
}

fn kw(k: &str) -> Line {
    Line {
        keyword: k.into(),
        phrase: String::new(),
    }
}

fn phrase(k: &str, p: String) -> Line {
    Line {
        keyword: k.into(),
        phrase: p,
    }
}

fn conjunct_text(model: &RequirementsModel, e: &Expr) -> String {
    match e {
        Expr::Ref(n) => match model.definition(n) {
            Some(d) if !d.text.is_empty() => d.text.clone(),
            _ => n.clone(),
        },
        other => expr_to_string(other),
    }
}

fn condition_lines(model: &RequirementsModel, e: &Expr) -> Vec<Line> {
    e.conjuncts()
        .into_iter()
        .enumerate()
        .map(|(i, c)| phrase(if i == 0 { "" } else { "and" }, conjunct_text(model, c)))
        .collect()
}

fn mode_text(model: &RequirementsModel, component: &str, mode: &str, active: bool) -> String {
    let target = Expr::Mode {
        component: component.into(),
        mode: mode.into(),
        query: ModeQuery::At(TimePoint::End),
        active: true,
    };
    let base = model
        .definitions()
        .iter()
        .find(|d| d.params.is_empty() && d.expr == target)
        .map(|d| d.text.clone())
        .unwrap_or_else(|| format!("{component} is in mode {mode} at the end of the round"));
    if active {
        base
    } else {
        format!("not: {base}")
    }
}

fn effect_lines(model: &RequirementsModel, effects: &[Effect]) -> Vec<Line> {
    if effects.is_empty() {
        return vec![phrase("", "nothing changes".into())];
    }
    effects
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let text = match e {
                Effect::Assign { target, value } => {
                    format!(
                        "{target} is {} at the end of the round",
                        expr_to_string(value)
                    )
                }
                Effect::Activate { component, mode } => mode_text(model, component, mode, true),
                Effect::Deactivate { component, mode } => mode_text(model, component, mode, false),
                Effect::Sync { target, source } => {
                    format!("{target} equals {source} at the end of the round")
                }
            };
            phrase(if i == 0 { "" } else { "and" }, text)
        })
        .collect()
}

/// The rendered lines of one requirement.
pub fn requirement_lines(model: &RequirementsModel, r: &Requirement) -> Vec<Line> {
    let mut out = Vec::new();
    match &r.template {
        Template::Every { required } => {
            out.push(kw("Always"));
            out.extend(condition_lines(model, required));
            out.push(kw("holds."));
        }
        Template::When { guard, required } => {
            out.push(kw("When"));
            out.extend(condition_lines(model, guard));
            out.push(kw("holds, then"));
            out.extend(condition_lines(model, required));
            out.push(kw("holds."));
        }
        Template::TriggerOnEvent {
            trigger,
            response,
            within,
            at_some_point,
        } => {
            out.push(kw("If"));
            out.extend(condition_lines(model, trigger));
            out.push(kw("occurs, then"));
            match response {
                Response::Effects(effs) => out.extend(effect_lines(model, effs)),
                Response::Require(c) => out.extend(condition_lines(model, c)),
            }
            match (within, at_some_point) {
                (Some(n), _) => out.push(kw(&format!("holds within {n} rounds."))),
                (None, true) => out.push(kw("holds at some point.")),
                (None, false) => out.push(kw("holds.")),
            }
        }
        Template::Latch {
            signal,
            value,
            condition,
        } => {
            out.push(kw("While"));
            out.extend(condition_lines(model, condition));
            out.push(kw("holds,"));
            out.push(phrase(
                "",
                format!("{signal} is latched at {}", expr_to_string(value)),
            ));
        }
        Template::TriggerOnChange {
            signal,
            required,
            effects,
        } => {
            out.push(kw(&format!("If {signal} changes, then")));
            if effects.is_empty() {
                out.extend(condition_lines(model, required));
            } else {
                out.extend(effect_lines(model, effects));
            }
            out.push(kw("holds."));
        }
        Template::ModeSet {
            component,
            exclusive,
        } => out.push(phrase(
            "",
            if *exclusive {
                format!("Exactly one mode of {component} is active.")
            } else {
                format!("Any number of modes of {component} may be active.")
            },
        )),
        Template::Case {
            guard,
            branches,
            total,
        } => {
            out.push(kw("If"));
            out.extend(condition_lines(model, guard));
            out.push(kw("occurs, then"));
            for b in branches {
                out.push(phrase("case", conjunct_text(model, &b.condition)));
                out.extend(effect_lines(model, &b.effects));
            }
            out.push(kw(if *total {
                "holds, for exactly one case."
            } else {
                "holds."
            }));
        }
    }
    out
}

pub fn render(model: &RequirementsModel, format: Format) -> String {
    match format {
        Format::Markdown => render_markdown(model),
        Format::Html => render_html(model),
    }
}

pub fn render_markdown(model: &RequirementsModel) -> String {
    let mut s = String::from("# Requirements\n");
    for r in model.requirements() {
        write!(s, "\n### {}: {}\n\n```text\n", r.id, r.title).unwrap();
        for l in requirement_lines(model, r) {
            match (l.keyword.is_empty(), l.phrase.is_empty()) {
                (_, true) => writeln!(s, "{}", l.keyword).unwrap(),
                (true, false) => writeln!(s, "    {}", l.phrase).unwrap(),
                (false, false) => writeln!(s, "{:>8} {}", l.keyword, l.phrase).unwrap(),
            }
        }
        s.push_str("```\n");
    }
    s
}

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_html(model: &RequirementsModel) -> String {
    let mut s = String::from(
        "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>Requirements</title></head>\n<body>\n<h1>Requirements</h1>\n",
    );
    for r in model.requirements() {
        writeln!(
            s,
            "<table class=\"req\" id=\"{}\">\n<tr><th colspan=\"2\">{}: {}</th></tr>",
            esc(&r.id),
            esc(&r.id),
            esc(&r.title)
        )
        .unwrap();
        for l in requirement_lines(model, r) {
            writeln!(
                s,
                "<tr><td>{}</td><td><u>{}</u></td></tr>",
                esc(&l.keyword),
                esc(&l.phrase)
            )
            .unwrap();
        }
        s.push_str("</table>\n");
    }
    s.push_str("</body>\n</html>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::generate_model;
    use crate::spec_io::load_bundled_cando;

    #[test]
    fn empty_model_is_header_only() {
        assert_eq!(
            render_markdown(&RequirementsModel::empty()),
            "# Requirements\n"
        );
        let html = render_html(&RequirementsModel::empty());
        assert!(!html.contains("<table"));
    }

    #[test]
    fn transition_block() {
        let g = generate_model(&load_bundled_cando()).unwrap();
        let md = render_markdown(&g.model);
        let block = "### 1.06: set_vLED to send_packet_6\n\n```text\nIf\n    \
                     The fsm is in state set_vLED at the start of the round\n     \
                     and The current event is CONT\noccurs, then\n    \
                     The fsm is in state send_packet_6 at the end of the round\nholds.\n```\n";
        assert!(md.contains(block), "{}", &md[..2000.min(md.len())]);
        assert_eq!(md, render_markdown(&g.model));
    }

    #[test]
    fn html_escapes() {
        assert_eq!(esc("a < b & \"c\""), "a &lt; b &amp; &quot;c&quot;");
    }
}
