use std::collections::{BTreeMap, BTreeSet};

use super::diag::{ParseDiagnostic, SourceSpan};
use super::lexer::{lex, Tok, Token};
use super::parse_angle;
use crate::calculus::{Command, SignalExpr};
use crate::library;
use crate::netmodel::{
    agent_compose, net_par_compose, net_seq_compose, validate_network, Agent, Event, Network, Preparation,
};
use crate::qnum::{QRegisterState, QubitId, C64};

/// Where each agent and event of a network came from.
#[derive(Debug, Clone, Default)]
pub struct NetSpans {
    pub name: Option<SourceSpan>,
    pub agents: BTreeMap<String, (SourceSpan, Vec<SourceSpan>)>,
}

impl NetSpans {
    fn merge(&self, other: &NetSpans, name: SourceSpan) -> NetSpans {
        let mut agents = self.agents.clone();
        for (k, (head, events)) in &other.agents {
            agents
                .entry(k.clone())
                .and_modify(|(_, ev)| ev.extend(events.iter().cloned()))
                .or_insert_with(|| (head.clone(), events.clone()));
        }
        NetSpans {
            name: Some(name),
            agents,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub network: Network,
    pub warnings: Vec<ParseDiagnostic>,
    pub spans: NetSpans,
}

type PResult<T> = Result<T, ParseDiagnostic>;

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    warnings: Vec<ParseDiagnostic>,
    networks: BTreeMap<String, (Network, NetSpans)>,
    last: Option<String>,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Number(s) => format!("number {s}"),
        Tok::Punct(c) => format!("'{c}'"),
        Tok::Eof => "end of input".into(),
    }
}

fn tok_text(t: &Tok) -> String {
    match t {
        Tok::Ident(s) | Tok::Number(s) => s.clone(),
        Tok::Punct(c) => c.to_string(),
        Tok::Eof => String::new(),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span.clone()
    }

    fn prev_span(&self) -> SourceSpan {
        self.toks[self.pos.saturating_sub(1)].span.clone()
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> PResult<T> {
        Err(ParseDiagnostic::error("syntax", msg, self.span()))
    }

    fn expected<T>(&self, what: &str) -> PResult<T> {
        self.err(format!("expected {what}, found {}", describe(self.peek())))
    }

    fn is_punct(&self, c: char) -> bool {
        self.peek() == &Tok::Punct(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_punct(&mut self, c: char) -> bool {
        if self.is_punct(c) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn punct(&mut self, c: char) -> PResult<()> {
        if self.eat_punct(c) {
            Ok(())
        } else {
            self.expected(&format!("'{c}'"))
        }
    }

    fn keyword(&mut self, kw: &str) -> PResult<SourceSpan> {
        if self.is_kw(kw) {
            Ok(self.bump().span)
        } else {
            self.expected(&format!("'{kw}'"))
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, SourceSpan)> {
        match self.peek().clone() {
            Tok::Ident(s) => Ok((s, self.bump().span)),
            _ => self.expected(what),
        }
    }

    fn qubit(&mut self) -> PResult<u32> {
        match self.peek().clone() {
            Tok::Number(s) => match s.parse::<u32>() {
                Ok(q) => {
                    self.bump();
                    Ok(q)
                }
                Err(_) => self.err(format!("qubit ids are non-negative integers, found {s}")),
            },
            _ => self.expected("a qubit id"),
        }
    }

    fn number(&mut self) -> PResult<f64> {
        let neg = self.eat_punct('-');
        match self.peek().clone() {
            Tok::Number(s) => {
                let v: f64 = s
                    .parse()
                    .map_err(|_| ParseDiagnostic::error("syntax", "bad number", self.span()))?;
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.expected("a number"),
        }
    }

    /// Raw text up to a ',' or ')' at the current nesting level.
    fn raw_until_separator(&mut self) -> (String, SourceSpan) {
        let start = self.span();
        let mut depth = 0;
        let mut text = String::new();
        loop {
            match self.peek() {
                Tok::Punct(',') | Tok::Punct(')') if depth == 0 => break,
                Tok::Eof => break,
                Tok::Punct('(') => depth += 1,
                Tok::Punct(')') => depth -= 1,
                _ => {}
            }
            text.push_str(&tok_text(&self.bump().tok));
        }
        (text, start.to(&self.prev_span()))
    }

    fn expr(&mut self) -> PResult<SignalExpr> {
        let mut e = SignalExpr::zero();
        loop {
            match self.peek().clone() {
                Tok::Number(s) if s == "0" || s == "1" => {
                    e.constant ^= s.parse::<u8>().unwrap();
                    self.bump();
                }
                Tok::Ident(s) => {
                    e.terms.push(s);
                    self.bump();
                }
                _ => return self.expected("a name, 0 or 1"),
            }
            if !self.eat_punct('+') {
                return Ok(e);
            }
        }
    }

    fn command(&mut self) -> PResult<Option<Command>> {
        let (head, span) = self.ident("a command (E, M, X, Z or nil)")?;
        if head == "nil" {
            return Ok(None);
        }
        if !matches!(head.as_str(), "E" | "M" | "X" | "Z") {
            return Err(ParseDiagnostic::error(
                "syntax",
                format!("unknown command {head}"),
                span,
            ));
        }
        self.punct('(')?;
        let q = self.qubit()?;
        self.punct(',')?;
        let cmd = match head.as_str() {
            "E" => Command::entangle(q, self.qubit()?),
            "X" => Command::x(q, self.expr()?),
            "Z" => Command::z(q, self.expr()?),
            "M" => {
                let (text, aspan) = self.raw_until_separator();
                let angle = parse_angle(&text)
                    .ok_or_else(|| ParseDiagnostic::error("syntax", format!("bad angle '{text}'"), aspan))?;
                let mut m = Command::measure(q, angle);
                while self.eat_punct(',') {
                    let (which, wspan) = self.ident("'s' or 't'")?;
                    self.punct(':')?;
                    let e = self.expr()?;
                    match (&mut m, which.as_str()) {
                        (Command::Measure { s_dep, .. }, "s") => *s_dep = e,
                        (Command::Measure { t_dep, .. }, "t") => *t_dep = e,
                        _ => {
                            return Err(ParseDiagnostic::error(
                                "syntax",
                                format!("measurement dependency must be s or t, found {which}"),
                                wspan,
                            ))
                        }
                    }
                }
                m
            }
            _ => unreachable!("checked above"),
        };
        self.punct(')')?;
        Ok(Some(cmd))
    }

    /// `[c_n; ...; c_1]`, returned in application order.
    fn command_list(&mut self) -> PResult<Vec<Command>> {
        self.punct('[')?;
        let mut cmds = Vec::new();
        while !self.is_punct(']') {
            if let Some(c) = self.command()? {
                cmds.push(c);
            }
            if !self.eat_punct(';') {
                break;
            }
        }
        self.punct(']')?;
        cmds.reverse();
        Ok(cmds)
    }

    fn event(&mut self) -> PResult<Option<Event>> {
        let (kw, span) = self.ident("an event (pattern, send, recv, qsend, qrecv or nil)")?;
        let ev = match kw.as_str() {
            "nil" => return Ok(None),
            "pattern" => {
                let mut cmds = self.command_list()?;
                while self.eat_punct('|') {
                    let tspan = self.span();
                    let more = self.command_list()?;
                    let used: BTreeSet<QubitId> = cmds.iter().flat_map(|c| c.qubits()).collect();
                    if let Some(q) = more.iter().flat_map(|c| c.qubits()).find(|q| used.contains(q)) {
                        return Err(ParseDiagnostic::error(
                            "syntax",
                            format!("tensor of patterns sharing qubit {q}"),
                            tspan,
                        ));
                    }
                    cmds.extend(more);
                }
                if cmds.is_empty() {
                    self.warnings.push(ParseDiagnostic::warning(
                        "empty-pattern",
                        "empty pattern",
                        span.to(&self.prev_span()),
                    ));
                }
                Event::Pattern(cmds)
            }
            "send" => {
                let (channel, _) = self.ident("a channel name")?;
                self.punct('(')?;
                let mut values = vec![self.expr()?];
                while self.eat_punct(',') {
                    values.push(self.expr()?);
                }
                self.punct(')')?;
                Event::Send { channel, values }
            }
            "recv" => {
                let (channel, _) = self.ident("a channel name")?;
                self.punct('(')?;
                let mut names = vec![self.ident("a name")?.0];
                while self.eat_punct(',') {
                    names.push(self.ident("a name")?.0);
                }
                self.punct(')')?;
                Event::Recv { channel, names }
            }
            "qsend" => {
                let (channel, _) = self.ident("a channel name")?;
                Event::QSend {
                    channel,
                    qubit: QubitId(self.qubit()?),
                }
            }
            "qrecv" => {
                let (channel, _) = self.ident("a channel name")?;
                Event::QRecv {
                    channel,
                    placeholder: QubitId(self.qubit()?),
                }
            }
            other => {
                return Err(ParseDiagnostic::error("syntax", format!("unknown event {other}"), span));
            }
        };
        Ok(Some(ev))
    }

    fn names(&mut self) -> PResult<Vec<String>> {
        if self.eat_punct('-') {
            return Ok(Vec::new());
        }
        let mut out = vec![self.ident("a name or '-'")?.0];
        loop {
            let next_is_label = matches!(self.peek_at(1), Tok::Ident(s) if s == "in" || s == "out")
                && self.peek_at(2) == &Tok::Punct(':');
            if self.is_punct(',') && !next_is_label {
                self.bump();
                out.push(self.ident("a name")?.0);
            } else if matches!(self.peek(), Tok::Ident(_)) && self.peek_at(1) != &Tok::Punct(':') {
                out.push(self.ident("a name")?.0);
            } else {
                return Ok(out);
            }
        }
    }

    /// `(in: ..., out: ...) qubits {...} { events }`, each part optional
    /// except the block.
    fn agent_part(&mut self, name: &str) -> PResult<(Agent, Vec<SourceSpan>)> {
        let mut agent = Agent::null(name);
        if self.eat_punct('(') {
            while !self.is_punct(')') {
                let (label, lspan) = self.ident("'in' or 'out'")?;
                self.punct(':')?;
                let names = self.names()?;
                match label.as_str() {
                    "in" => agent.cin = names,
                    "out" => agent.cout = names,
                    _ => {
                        return Err(ParseDiagnostic::error(
                            "syntax",
                            format!("expected 'in' or 'out', found '{label}'"),
                            lspan,
                        ))
                    }
                }
                if !self.eat_punct(',') {
                    break;
                }
            }
            self.punct(')')?;
        }
        if self.is_kw("qubits") {
            self.bump();
            self.punct('{')?;
            while !self.is_punct('}') {
                let qspan = self.span();
                if !agent.sort.insert(QubitId(self.qubit()?)) {
                    self.warnings
                        .push(ParseDiagnostic::warning("duplicate-qubit", "qubit listed twice", qspan));
                }
                if !self.eat_punct(',') {
                    break;
                }
            }
            self.punct('}')?;
        }
        self.punct('{')?;
        let mut spans = Vec::new();
        while !self.is_punct('}') {
            let start = self.span();
            if let Some(e) = self.event()? {
                agent.events.push(e);
                spans.push(start.to(&self.prev_span()));
            }
            if !self.eat_punct(';') {
                break;
            }
        }
        self.punct('}')?;
        Ok((agent, spans))
    }

    fn agent(&mut self) -> PResult<(Agent, SourceSpan, Vec<SourceSpan>)> {
        self.keyword("agent")?;
        let (name, head) = self.ident("an agent name")?;
        let (mut agent, mut spans) = self.agent_part(&name)?;
        while self.is_kw("then") {
            let tspan = self.bump().span;
            let (next, more) = self.agent_part(&name)?;
            agent =
                agent_compose(&agent, &next).map_err(|e| ParseDiagnostic::error("compose", e.to_string(), tspan))?;
            spans.extend(more);
        }
        Ok((agent, head, spans))
    }

    fn prep_item(&mut self, prep: &mut Preparation) -> PResult<()> {
        let (kind, span) = self.ident("E, plus, state or density")?;
        let item = match kind.as_str() {
            "E" => {
                self.punct('(')?;
                let a = self.qubit()?;
                self.punct(',')?;
                let b = self.qubit()?;
                self.punct(')')?;
                if a == b {
                    return Err(ParseDiagnostic::error(
                        "syntax",
                        "E needs two distinct qubits",
                        span.to(&self.prev_span()),
                    ));
                }
                Preparation::entangled(&[(a, b)])
            }
            "plus" => {
                self.punct('(')?;
                let mut ids = vec![QubitId(self.qubit()?)];
                while self.eat_punct(',') {
                    ids.push(QubitId(self.qubit()?));
                }
                self.punct(')')?;
                Preparation::Graph { ids, edges: vec![] }
            }
            "state" | "density" => {
                self.punct('(')?;
                let mut ids = vec![QubitId(self.qubit()?)];
                while self.eat_punct(',') {
                    ids.push(QubitId(self.qubit()?));
                }
                self.punct(')')?;
                self.punct('[')?;
                let mut amps = Vec::new();
                while !self.is_punct(']') {
                    if self.eat_punct('(') {
                        let re = self.number()?;
                        self.punct(',')?;
                        let im = self.number()?;
                        self.punct(')')?;
                        amps.push(C64::new(re, im));
                    } else {
                        amps.push(C64::new(self.number()?, 0.0));
                    }
                    if !self.eat_punct(',') {
                        break;
                    }
                }
                self.punct(']')?;
                let s = if kind == "state" {
                    QRegisterState::pure(ids, nalgebra::DVector::from_vec(amps))
                } else {
                    let dim = 1usize << ids.len();
                    if amps.len() != dim * dim {
                        return Err(ParseDiagnostic::error(
                            "syntax",
                            format!("density needs {} entries, found {}", dim * dim, amps.len()),
                            span.to(&self.prev_span()),
                        ));
                    }
                    QRegisterState::mixed(ids, nalgebra::DMatrix::from_row_slice(dim, dim, &amps))
                }
                .map_err(|e| ParseDiagnostic::error("syntax", e.to_string(), span.to(&self.prev_span())))?;
                Preparation::State(s)
            }
            other => {
                return Err(ParseDiagnostic::error(
                    "syntax",
                    format!("unknown preparation {other}"),
                    span,
                ))
            }
        };
        *prep = merge_prep(prep, &item).map_err(|m| ParseDiagnostic::error("syntax", m, span.to(&self.prev_span())))?;
        Ok(())
    }

    fn network_body(&mut self, name: &str, name_span: SourceSpan) -> PResult<(Network, NetSpans)> {
        self.punct('{')?;
        let mut agents = Vec::new();
        let mut prep = Preparation::null();
        let mut spans = NetSpans {
            name: Some(name_span),
            agents: BTreeMap::new(),
        };
        loop {
            if self.is_kw("prepare") {
                self.bump();
                self.prep_item(&mut prep)?;
                while self.eat_punct(',') {
                    self.prep_item(&mut prep)?;
                }
                self.eat_punct(';');
            } else if self.is_kw("agent") {
                let (a, head, ev) = self.agent()?;
                if spans.agents.contains_key(&a.name) {
                    return Err(ParseDiagnostic::error(
                        "H3",
                        format!("duplicate agent name {}", a.name),
                        head,
                    ));
                }
                spans.agents.insert(a.name.clone(), (head, ev));
                agents.push(a);
                self.eat_punct(';');
            } else if self.is_punct('}') {
                self.bump();
                return Ok((Network::new(name, agents, prep), spans));
            } else {
                return self.expected("'prepare', 'agent' or '}'");
            }
        }
    }

    fn lookup(&self, name: &str, span: &SourceSpan) -> PResult<(Network, NetSpans)> {
        self.networks
            .get(name)
            .cloned()
            .ok_or_else(|| ParseDiagnostic::error("unknown-network", format!("unknown network {name}"), span.clone()))
    }

    fn network_expr(&mut self, name: &str, name_span: SourceSpan) -> PResult<(Network, NetSpans)> {
        let (op, span) = self.ident("seq, par or library")?;
        self.punct('(')?;
        let result = match op.as_str() {
            "library" => {
                let (text, tspan) = self.raw_until_separator();
                let mut n = library::by_name(&text)
                    .map_err(|e| ParseDiagnostic::error("unknown-network", e.to_string(), tspan))?;
                n.name = name.to_string();
                let agents = n
                    .agents
                    .iter()
                    .map(|a| (a.name.clone(), (span.clone(), vec![span.clone(); a.events.len()])));
                let spans = NetSpans {
                    name: Some(name_span),
                    agents: agents.collect(),
                };
                (n, spans)
            }
            "seq" | "par" => {
                let (a, aspan) = self.ident("a network name")?;
                self.punct(',')?;
                let (b, bspan) = self.ident("a network name")?;
                let (n1, s1) = self.lookup(&a, &aspan)?;
                let (n2, s2) = self.lookup(&b, &bspan)?;
                let composed = if op == "seq" {
                    net_seq_compose(&n1, &n2)
                } else {
                    net_par_compose(&n1, &n2)
                };
                let mut n = composed.map_err(|e| ParseDiagnostic::error("compose", e.to_string(), span.to(&bspan)))?;
                n.name = name.to_string();
                (n, s1.merge(&s2, name_span))
            }
            other => {
                return Err(ParseDiagnostic::error(
                    "syntax",
                    format!("unknown network operator {other}"),
                    span,
                ))
            }
        };
        self.punct(')')?;
        self.eat_punct(';');
        Ok(result)
    }

    fn file(&mut self) -> Result<(), Vec<ParseDiagnostic>> {
        while self.peek() != &Tok::Eof {
            self.keyword("network").map_err(|e| vec![e])?;
            let (name, name_span) = self.ident("a network name").map_err(|e| vec![e])?;
            let (n, spans) = if self.eat_punct('=') {
                self.network_expr(&name, name_span.clone())
            } else {
                self.network_body(&name, name_span.clone())
            }
            .map_err(|e| vec![e])?;
            let errors = violations(&n, &spans);
            if !errors.is_empty() {
                return Err(errors);
            }
            if self.networks.contains_key(&name) {
                return Err(vec![ParseDiagnostic::error(
                    "duplicate-network",
                    format!("network {name} defined twice"),
                    name_span,
                )]);
            }
            self.networks.insert(name.clone(), (n, spans));
            self.last = Some(name);
        }
        Ok(())
    }
}

fn merge_prep(a: &Preparation, b: &Preparation) -> Result<Preparation, String> {
    match (a, b) {
        (Preparation::Graph { ids: i1, edges: e1 }, Preparation::Graph { ids: i2, edges: e2 }) => {
            let mut ids = i1.clone();
            ids.extend(i2.iter().filter(|q| !i1.contains(q)));
            let mut edges = e1.clone();
            edges.extend(e2.iter().copied());
            Ok(Preparation::Graph { ids, edges })
        }
        _ => a.tensor(b).map_err(|e| e.to_string()),
    }
}

/// Validation failures of `n` as diagnostics at the offending source.
fn violations(n: &Network, spans: &NetSpans) -> Vec<ParseDiagnostic> {
    let fallback = spans
        .name
        .clone()
        .unwrap_or_else(|| SourceSpan::new("<input>", 1, 1, 1));
    validate_network(n)
        .into_iter()
        .map(|v| {
            let agent = v
                .agent
                .and_then(|i| n.agents.get(i))
                .and_then(|a| spans.agents.get(&a.name));
            let span = match (agent, v.event) {
                (Some((_, events)), Some(e)) if e < events.len() => events[e].clone(),
                (Some((head, _)), _) => head.clone(),
                _ => fallback.clone(),
            };
            ParseDiagnostic::error(&v.rule.to_string(), v.message, span)
        })
        .collect()
}

/// Parse a source holding one or more networks; the last one is the result.
pub fn parse_network_in(text: &str, file: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    let toks = lex(text, file).map_err(|e| vec![e])?;
    let mut p = Parser {
        toks,
        pos: 0,
        warnings: Vec::new(),
        networks: BTreeMap::new(),
        last: None,
    };
    p.file()?;
    let Some(last) = p.last.take() else {
        return Err(vec![ParseDiagnostic::error(
            "syntax",
            "no network defined",
            SourceSpan::new(file, 1, 1, 1),
        )]);
    };
    let (network, spans) = p.networks.remove(&last).expect("recorded network");
    Ok(Parsed {
        network,
        warnings: p.warnings,
        spans,
    })
}

pub fn parse_network(text: &str) -> Result<Parsed, Vec<ParseDiagnostic>> {
    parse_network_in(text, "<input>")
}
