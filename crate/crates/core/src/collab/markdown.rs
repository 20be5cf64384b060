//! A small Markdown dialect: paragraphs, emphasis, strong, inline code, fenced
//! code, links and unordered lists. All other input, including raw HTML, is
//! rendered as escaped text.

use std::collections::BTreeSet;

use crate::ids::{ProjectId, UserId};
use crate::ontology::{Entity, PrefixTable};
use crate::project::urls::{entity_url, Tab};

/// What a comment body refers to, plus its rendering.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParsedBody {
    pub mentions: Vec<UserId>,
    pub entity_links: Vec<Entity>,
    pub html: String,
}

/// Resolution context for entity links inside comment bodies.
pub struct BodyContext<'a> {
    pub project: &'a ProjectId,
    pub prefixes: &'a PrefixTable,
    pub entities: &'a BTreeSet<Entity>,
}

pub fn parse_comment_body(body: &str, ctx: &BodyContext<'_>) -> ParsedBody {
    let mut r = Renderer { ctx, out: ParsedBody::default() };
    r.blocks(body);
    r.out
}

pub(crate) fn escape_html(text: &str, out: &mut String) {
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
}

pub fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    escape_html(text, &mut out);
    out
}

struct Renderer<'a, 'c> {
    ctx: &'a BodyContext<'c>,
    out: ParsedBody,
}

fn list_item(line: &str) -> Option<&str> {
    let trimmed = line.trim_start_matches(' ');
    if line.len() - trimmed.len() > 3 {
        return None;
    }
    let mut chars = trimmed.chars();
    match (chars.next(), chars.next()) {
        (Some('-' | '*' | '+'), Some(' ' | '\t')) => Some(trimmed[2..].trim_start()),
        _ => None,
    }
}

fn fence(line: &str) -> Option<&str> {
    let trimmed = line.trim_start_matches(' ');
    if line.len() - trimmed.len() > 3 {
        return None;
    }
    trimmed.strip_prefix("```").map(str::trim)
}

impl Renderer<'_, '_> {
    fn blocks(&mut self, body: &str) {
        let lines: Vec<&str> = body.lines().collect();
        let mut i = 0;
        while i < lines.len() {
            let line = lines[i];
            if line.trim().is_empty() {
                i += 1;
            } else if let Some(info) = fence(line) {
                i += 1;
                let mut code = String::new();
                while i < lines.len() && fence(lines[i]).is_none_or(|rest| !rest.is_empty()) {
                    code.push_str(lines[i]);
                    code.push('\n');
                    i += 1;
                }
                i += 1;
                let lang: String = info.chars().take_while(|c| c.is_ascii_alphanumeric() || *c == '-').collect();
                if lang.is_empty() {
                    self.out.html.push_str("<pre><code>");
                } else {
                    self.out.html.push_str(&format!("<pre><code class=\"language-{lang}\">"));
                }
                escape_html(&code, &mut self.out.html);
                self.out.html.push_str("</code></pre>\n");
            } else if list_item(line).is_some() {
                self.out.html.push_str("<ul>\n");
                while i < lines.len() {
                    let Some(first) = list_item(lines[i]) else { break };
                    let mut item = first.to_owned();
                    i += 1;
                    while i < lines.len()
                        && !lines[i].trim().is_empty()
                        && list_item(lines[i]).is_none()
                        && fence(lines[i]).is_none()
                        && lines[i].starts_with("  ")
                    {
                        item.push('\n');
                        item.push_str(lines[i].trim());
                        i += 1;
                    }
                    self.out.html.push_str("<li>");
                    self.inline(&item, true);
                    self.out.html.push_str("</li>\n");
                }
                self.out.html.push_str("</ul>\n");
            } else {
                let mut para = Vec::new();
                while i < lines.len() && !lines[i].trim().is_empty() && fence(lines[i]).is_none() && list_item(lines[i]).is_none() {
                    para.push(lines[i].trim());
                    i += 1;
                }
                self.out.html.push_str("<p>");
                self.inline(&para.join("\n"), true);
                self.out.html.push_str("</p>\n");
            }
        }
    }

    /// Renders inline markup. `refs` enables mention and entity-link detection
    /// (off inside link text, where nested anchors are not allowed).
    fn inline(&mut self, text: &str, refs: bool) {
        let chars: Vec<char> = text.chars().collect();
        let mut i = 0;
        let mut plain = String::new();
        while i < chars.len() {
            let c = chars[i];
            let prev = if i == 0 { None } else { Some(chars[i - 1]) };
            match c {
                '\\' if i + 1 < chars.len() && chars[i + 1].is_ascii_punctuation() => {
                    plain.push(chars[i + 1]);
                    i += 2;
                }
                '`' => {
                    let run = chars[i..].iter().take_while(|&&c| c == '`').count();
                    match find_run(&chars, i + run, '`', run) {
                        Some(end) => {
                            self.flush(&mut plain);
                            let code: String = chars[i + run..end].iter().collect();
                            let code = strip_one_space(&code);
                            self.out.html.push_str("<code>");
                            escape_html(code, &mut self.out.html);
                            self.out.html.push_str("</code>");
                            i = end + run;
                        }
                        None => {
                            plain.extend(&chars[i..i + run]);
                            i += run;
                        }
                    }
                }
                '*' | '_' => {
                    let strong = chars.get(i + 1) == Some(&c);
                    let width = if strong { 2 } else { 1 };
                    let intraword = c == '_' && prev.is_some_and(char::is_alphanumeric);
                    let close = if intraword { None } else { find_delimiter(&chars, i + width, c, width) };
                    match close {
                        Some(end) => {
                            self.flush(&mut plain);
                            let inner: String = chars[i + width..end].iter().collect();
                            let tag = if strong { "strong" } else { "em" };
                            self.out.html.push_str(&format!("<{tag}>"));
                            self.inline(&inner, refs);
                            self.out.html.push_str(&format!("</{tag}>"));
                            i = end + width;
                        }
                        None => {
                            plain.extend(&chars[i..i + width]);
                            i += width;
                        }
                    }
                }
                '[' => match parse_link(&chars, i) {
                    Some((label, target, end)) if is_safe_url(&target) => {
                        self.flush(&mut plain);
                        self.out.html.push_str("<a href=\"");
                        escape_html(&target, &mut self.out.html);
                        self.out.html.push_str("\">");
                        self.inline(&label, false);
                        self.out.html.push_str("</a>");
                        i = end;
                    }
                    _ => {
                        plain.push('[');
                        i += 1;
                    }
                },
                '@' if refs && !prev.is_some_and(|p| p.is_alphanumeric() || matches!(p, '_' | '.' | '-' | '@')) => {
                    let len = chars[i + 1..]
                        .iter()
                        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
                        .count();
                    let name: String = chars[i + 1..i + 1 + len].iter().collect();
                    let name = name.trim_end_matches('.');
                    if name.is_empty() {
                        plain.push('@');
                        i += 1;
                    } else {
                        self.flush(&mut plain);
                        let user = UserId::new(name);
                        self.out.html.push_str("<a class=\"mention\" href=\"#users/");
                        escape_html(name, &mut self.out.html);
                        self.out.html.push_str("\">@");
                        escape_html(name, &mut self.out.html);
                        self.out.html.push_str("</a>");
                        if !self.out.mentions.contains(&user) {
                            self.out.mentions.push(user);
                        }
                        i += 1 + name.chars().count();
                    }
                }
                c if refs && c.is_ascii_alphabetic() && !prev.is_some_and(|p| p.is_alphanumeric() || matches!(p, '_' | '.' | '-' | ':' | '/' | '@')) => {
                    match self.entity_link(&chars, i) {
                        Some((name, entities)) => {
                            self.flush(&mut plain);
                            let href = entity_url(self.ctx.project, Tab::for_kind(entities[0].kind), &entities[0]);
                            self.out.html.push_str("<a class=\"entity-link\" href=\"");
                            escape_html(&href, &mut self.out.html);
                            self.out.html.push_str("\">");
                            escape_html(&name, &mut self.out.html);
                            self.out.html.push_str("</a>");
                            for e in entities {
                                if !self.out.entity_links.contains(&e) {
                                    self.out.entity_links.push(e);
                                }
                            }
                            i += name.chars().count();
                        }
                        None => {
                            // consume the whole word so a later ':' is not re-scanned mid-word
                            let len = chars[i..].iter().take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-')).count();
                            plain.extend(&chars[i..i + len]);
                            i += len;
                        }
                    }
                }
                c => {
                    plain.push(c);
                    i += 1;
                }
            }
        }
        self.flush(&mut plain);
    }

    fn flush(&mut self, plain: &mut String) {
        escape_html(plain, &mut self.out.html);
        plain.clear();
    }

    /// A `prefix:local` token at `start` that names entities in the project.
    fn entity_link(&self, chars: &[char], start: usize) -> Option<(String, Vec<Entity>)> {
        let prefix_len = chars[start..]
            .iter()
            .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
            .count();
        let colon = start + prefix_len;
        if chars.get(colon) != Some(&':') {
            return None;
        }
        let first_local = *chars.get(colon + 1)?;
        if !(first_local.is_alphanumeric() || first_local == '_') {
            return None;
        }
        let local_len = chars[colon + 1..]
            .iter()
            .take_while(|c| c.is_alphanumeric() || matches!(c, '_' | '.' | '-'))
            .count();
        let token: String = chars[start..colon + 1 + local_len].iter().collect();
        let token = token.trim_end_matches('.').to_owned();
        let iri = self.ctx.prefixes.expand(&token).ok()?;
        let found: Vec<Entity> = self.ctx.entities.iter().filter(|e| e.iri == iri).cloned().collect();
        (!found.is_empty()).then_some((token, found))
    }
}

fn strip_one_space(code: &str) -> &str {
    if code.len() >= 2 && code.starts_with(' ') && code.ends_with(' ') && !code.trim().is_empty() {
        &code[1..code.len() - 1]
    } else {
        code
    }
}

/// Start index of the next run of exactly `width` `delim` characters at or after `from`.
fn find_run(chars: &[char], from: usize, delim: char, width: usize) -> Option<usize> {
    let mut i = from;
    while i < chars.len() {
        if chars[i] == delim {
            let run = chars[i..].iter().take_while(|&&c| c == delim).count();
            if run == width {
                return Some(i);
            }
            i += run;
        } else {
            i += 1;
        }
    }
    None
}

/// Closing emphasis delimiter: non-empty content, no whitespace just inside either end.
fn find_delimiter(chars: &[char], from: usize, delim: char, width: usize) -> Option<usize> {
    if chars.get(from).is_none_or(|c| c.is_whitespace()) {
        return None;
    }
    let mut i = from;
    while i + width <= chars.len() {
        if chars[i] == '`' {
            let run = chars[i..].iter().take_while(|&&c| c == '`').count();
            i = find_run(chars, i + run, '`', run).map_or(i + run, |end| end + run);
            continue;
        }
        if chars[i..i + width].iter().all(|&c| c == delim)
            && i > from
            && !chars[i - 1].is_whitespace()
            && (width == 2 || chars.get(i + 1) != Some(&delim))
        {
            let after_ok = delim != '_' || !chars.get(i + width).is_some_and(|c| c.is_alphanumeric());
            if after_ok {
                return Some(i);
            }
        }
        i += 1;
    }
    None
}

/// `[label](target)` starting at `start`; returns label, target and the index after `)`.
fn parse_link(chars: &[char], start: usize) -> Option<(String, String, usize)> {
    let mut depth = 0;
    let mut close = None;
    for (j, &c) in chars.iter().enumerate().skip(start) {
        match c {
            '[' => depth += 1,
            ']' => {
                depth -= 1;
                if depth == 0 {
                    close = Some(j);
                    break;
                }
            }
            _ => {}
        }
    }
    let close = close?;
    if chars.get(close + 1) != Some(&'(') {
        return None;
    }
    let end = chars[close + 2..].iter().position(|&c| c == ')')? + close + 2;
    let target: String = chars[close + 2..end].iter().collect();
    let target = target.trim();
    if target.is_empty() || target.contains(char::is_whitespace) {
        return None;
    }
    Some((chars[start + 1..close].iter().collect(), target.to_owned(), end + 1))
}

fn is_safe_url(target: &str) -> bool {
    let lower = target.to_ascii_lowercase();
    match lower.find(':') {
        // a colon before any '/', '?' or '#' means an explicit scheme
        Some(colon) if !lower[..colon].contains(['/', '?', '#']) => {
            matches!(&lower[..colon], "http" | "https" | "mailto")
        }
        _ => true,
    }
}
