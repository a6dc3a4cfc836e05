//! Interactive planning session over stdin/stdout.
//!
//! The session is generic over its input and output streams so scripted
//! tests drive exactly the code path a terminal user would.

use std::collections::HashMap;
use std::io::{self, BufRead, Write};
use std::path::Path;
use std::time::Instant;

use crate::citygraph::{load_city_graph, CityGraph, VertexId};
use crate::geo::GeoPoint;
use crate::pathfind::{build_closure, ClosureMatrix, ClosureOptions, Heuristic, PathError, TerminalSet};
use crate::solvers::{
    expand_tour, held_karp, solve_best_of_both, solve_natural, solve_nearest_neighbor, NaturalMode,
    SolveError, Tour, DEFAULT_EXACT_CAP,
};
use crate::urlcodec::{emit_gmaps_url, parse_gmaps_url, UrlError, WaypointRequest};

/// Above this many terminals the exact option is hidden unless extreme mode
/// is on.
pub const MENU_EXACT_LIMIT: usize = 20;

pub const EXTREME_MODE_COMMAND: &str = "extreme-mode";

const URL_PROMPT: &str = "Paste here the Google Maps URL containing the points you want to visit.\n\
Remember that the first point will be also the last one in the tour:";

const INVALID_URL: &str = "Invalid URL! Try again:";

const GRAPH_WARNING: &str = "WARNING: The distance is computed using our graph of the city, which might\n\
differ from the one used by Google Maps. This means that what for us is the\n\
shortest tour may not be the same for them, also because they might\n\
have used a different way to complete the paths between every\n\
pair of vertices";

const EXTREME_WARNING: &str = "WARNING: extreme mode enabled. The exact option is no longer limited\n\
to twenty points; its time and memory grow exponentially with the number of points.";

pub const DISCONNECTED_NOTICE: &str = "At least two of the points are not connected in our graph of the city,\n\
so a distance cannot be computed. Using option 1 (Natural approximation fast mode)\n\
to compute a possible route.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Choice {
    NaturalFast,
    NaturalNormal,
    NearestNeighbor,
    BestOfBoth,
    Exact,
    ChangeUrl,
    Exit,
}

impl Choice {
    pub fn parse(input: &str) -> Option<Self> {
        match input.trim() {
            "1" => Some(Self::NaturalFast),
            "2" => Some(Self::NaturalNormal),
            "3" => Some(Self::NearestNeighbor),
            "4" => Some(Self::BestOfBoth),
            "5" => Some(Self::Exact),
            "c" | "C" => Some(Self::ChangeUrl),
            "x" | "X" => Some(Self::Exit),
            _ => None,
        }
    }

    pub fn from_number(n: u8) -> Option<Self> {
        Self::parse(&n.to_string())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionOptions {
    pub heuristic: Heuristic,
    pub astar_threshold: usize,
    pub exact_cap: usize,
    pub verbose: bool,
    pub extreme: bool,
}

impl Default for SessionOptions {
    fn default() -> Self {
        Self {
            heuristic: Heuristic::Euclidean,
            astar_threshold: 5,
            exact_cap: DEFAULT_EXACT_CAP,
            verbose: false,
            extreme: false,
        }
    }
}

/// Why a URL was not accepted.
#[derive(Debug)]
pub enum RequestError {
    Url(UrlError),
    Snap(PathError),
}

/// What an algorithm choice printed.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteOutcome {
    pub tour: Tour,
    pub url: String,
    pub fell_back: bool,
}

pub struct Session<'g> {
    graph: &'g CityGraph,
    options: SessionOptions,
    request: Option<WaypointRequest>,
    terminals: Option<TerminalSet>,
    closure: Option<ClosureMatrix>,
    point_echo: HashMap<VertexId, GeoPoint>,
    closure_builds: usize,
}

impl<'g> Session<'g> {
    pub fn new(graph: &'g CityGraph, options: SessionOptions) -> Self {
        Self {
            graph,
            options,
            request: None,
            terminals: None,
            closure: None,
            point_echo: HashMap::new(),
            closure_builds: 0,
        }
    }

    pub fn enable_extreme(&mut self) {
        self.options.extreme = true;
    }

    pub fn is_extreme(&self) -> bool {
        self.options.extreme
    }

    /// How many times the terminal subgraph has been built this session.
    pub fn closure_builds(&self) -> usize {
        self.closure_builds
    }

    pub fn terminals(&self) -> Option<&TerminalSet> {
        self.terminals.as_ref()
    }

    pub fn has_closure(&self) -> bool {
        self.closure.is_some()
    }

    /// Original user point for a snapped vertex.
    pub fn original_point(&self, v: VertexId) -> Option<GeoPoint> {
        self.point_echo.get(&v).copied()
    }

    /// Parses and snaps a new URL, dropping any cached subgraph.
    pub fn set_url(&mut self, url: &str, out: &mut impl Write) -> io::Result<Result<(), RequestError>> {
        let request = match parse_gmaps_url(url) {
            Ok(r) => r,
            Err(e) => return Ok(Err(RequestError::Url(e))),
        };
        let snapped = match TerminalSet::snap(self.graph, &request.points) {
            Ok(s) => s,
            Err(e) => return Ok(Err(RequestError::Snap(e))),
        };
        for &i in &snapped.collapsed {
            writeln!(
                out,
                "Note: point {} ({}) is at the same place on our map as an earlier point and was merged.",
                i + 1,
                request.points[i]
            )?;
        }
        let terminals = snapped.terminals;
        self.point_echo = terminals
            .vertices()
            .iter()
            .copied()
            .zip(terminals.origin_points().iter().copied())
            .collect();
        self.terminals = Some(terminals);
        self.request = Some(request);
        self.closure = None;
        Ok(Ok(()))
    }

    pub fn exact_available(&self) -> bool {
        self.options.extreme || self.terminals.as_ref().map_or(0, |t| t.len()) <= MENU_EXACT_LIMIT
    }

    pub fn menu_text(&self) -> String {
        let mut menu = String::from(
            "Choose (write the number and press enter):\n\
             \x20 1. Natural approximation fast mode -- won't show total distance\n\
             \x20    (ALMOST INSTANT)\n\
             \x20 2. Natural approximation normal mode -- might get a better tour than\n\
             \x20    option 1 (medium)\n\
             \x20 3. Nearest Neighbor (medium)\n\
             \x20 4. The best of both (options 2 and 3 combined) (medium)\n",
        );
        if self.exact_available() {
            menu.push_str(
                " 5. Exact -- potentially very slow, about 30 seconds for 20 points\n\
                 \x20    (SLOW)\n",
            );
        }
        menu.push_str(" c. Change URL\n x. Exit\n");
        menu
    }

    /// Shows the menu until a valid choice is read. End of input exits.
    pub fn show_menu(&self, input: &mut impl BufRead, out: &mut impl Write) -> io::Result<Choice> {
        write!(out, "{}", self.menu_text())?;
        loop {
            out.flush()?;
            let Some(line) = read_line(input)? else {
                return Ok(Choice::Exit);
            };
            match Choice::parse(&line) {
                Some(Choice::Exact) if !self.exact_available() => {}
                Some(choice) => return Ok(choice),
                None => {}
            }
            writeln!(out, "Invalid option! Try again:")?;
        }
    }

    fn ensure_closure(&mut self, out: &mut impl Write) -> io::Result<Result<&ClosureMatrix, PathError>> {
        if self.closure.is_none() {
            let terminals = self.terminals.as_ref().expect("URL loaded");
            let options = ClosureOptions {
                astar_threshold: self.options.astar_threshold,
                heuristic: self.options.heuristic,
                parallel: true,
            };
            match build_closure(self.graph, terminals, &options) {
                Ok((m, elapsed)) => {
                    writeln!(out, "Time required to build subgraph: {:.3}s", elapsed.as_secs_f64())?;
                    self.closure_builds += 1;
                    self.closure = Some(m);
                }
                Err(e) => return Ok(Err(e)),
            }
        }
        Ok(Ok(self.closure.as_ref().expect("just built")))
    }

    /// Runs one algorithm option and prints the route. Returns `None` when
    /// nothing was printed as a route (e.g. exact solver refused).
    pub fn execute_choice(&mut self, choice: Choice, out: &mut impl Write) -> io::Result<Option<RouteOutcome>> {
        let terminals = match &self.terminals {
            Some(t) => t.clone(),
            None => {
                writeln!(out, "No URL loaded.")?;
                return Ok(None);
            }
        };
        if choice == Choice::NaturalFast {
            return self.finish_fast(&terminals, false, out).map(Some);
        }
        if !matches!(
            choice,
            Choice::NaturalNormal | Choice::NearestNeighbor | Choice::BestOfBoth | Choice::Exact
        ) {
            return Ok(None);
        }

        let verbose = self.options.verbose;
        let cap = if self.options.extreme {
            usize::MAX
        } else {
            self.options.exact_cap
        };
        let closure = match self.ensure_closure(out)? {
            Ok(m) => m,
            Err(e) => {
                writeln!(out, "Could not build the subgraph: {e}")?;
                return Ok(None);
            }
        };
        if !closure.is_complete() {
            writeln!(out, "{DISCONNECTED_NOTICE}")?;
            return self.finish_fast(&terminals, true, out).map(Some);
        }

        let started = Instant::now();
        let result = match choice {
            Choice::NaturalNormal => solve_natural(&terminals, NaturalMode::Normal(closure)),
            Choice::NearestNeighbor => solve_nearest_neighbor(closure),
            Choice::BestOfBoth => solve_best_of_both(&terminals, closure),
            _ => held_karp(closure, cap).map(|s| s.tour),
        };
        let elapsed = started.elapsed().as_secs_f64();
        let tour = match result {
            Ok(tour) => tour,
            Err(SolveError::TooLarge { n, cap }) => {
                writeln!(
                    out,
                    "The exact option supports at most {cap} points and this URL has {n}. \
                     Write \"{EXTREME_MODE_COMMAND}\" at the URL prompt to remove the limit."
                )?;
                return Ok(None);
            }
            Err(e) => {
                writeln!(out, "Could not compute the route: {e}")?;
                return Ok(None);
            }
        };
        let street = if verbose {
            expand_tour(&tour, closure).ok()
        } else {
            None
        };
        self.print_route(&terminals, tour, elapsed, false, street, out).map(Some)
    }

    fn finish_fast(&self, terminals: &TerminalSet, fell_back: bool, out: &mut impl Write) -> io::Result<RouteOutcome> {
        let started = Instant::now();
        let tour = solve_natural(terminals, NaturalMode::Fast).expect("fast mode needs no distances");
        let elapsed = started.elapsed().as_secs_f64();
        self.print_route(terminals, tour, elapsed, fell_back, None, out)
    }

    fn print_route(
        &self,
        terminals: &TerminalSet,
        tour: Tour,
        elapsed: f64,
        fell_back: bool,
        street: Option<Vec<VertexId>>,
        out: &mut impl Write,
    ) -> io::Result<RouteOutcome> {
        let points = tour.points(terminals);
        writeln!(out, "Route:")?;
        for (k, p) in points.iter().enumerate() {
            writeln!(out, "  {:>3}. {p}", k + 1)?;
        }
        if let Some(total) = tour.total_m() {
            writeln!(out, "Total distance: {total:.1} m")?;
        }
        writeln!(out, "Time required to compute route: {elapsed:.4}s")?;
        if let Some(street) = street {
            let ids: Vec<String> = street.iter().map(|v| v.to_string()).collect();
            writeln!(out, "Street-level vertices ({}): {}", ids.len(), ids.join(" "))?;
        }
        let url = emit_gmaps_url(&points).expect("tour has at least 3 points");
        writeln!(out, "See the route in Google Maps:\n{url}")?;
        Ok(RouteOutcome { tour, url, fell_back })
    }

    /// Prompts until a valid URL is loaded. Returns `false` when the user
    /// asked to exit (or input ended).
    pub fn prompt_url(&mut self, input: &mut impl BufRead, out: &mut impl Write) -> io::Result<bool> {
        writeln!(out, "{URL_PROMPT}")?;
        loop {
            out.flush()?;
            let Some(line) = read_line(input)? else {
                return Ok(false);
            };
            let line = line.trim();
            if line.eq_ignore_ascii_case("x") {
                return Ok(false);
            }
            if line == EXTREME_MODE_COMMAND {
                self.enable_extreme();
                writeln!(out, "{EXTREME_WARNING}")?;
                writeln!(out, "{URL_PROMPT}")?;
                continue;
            }
            match self.set_url(line, out)? {
                Ok(()) => return Ok(true),
                Err(RequestError::Url(UrlError::InvalidUrl)) => writeln!(out, "{INVALID_URL}")?,
                Err(RequestError::Url(e)) => writeln!(out, "Invalid URL: {e}. Try again:")?,
                Err(RequestError::Snap(PathError::TooFewTerminals(_))) => writeln!(
                    out,
                    "All points fall on the same place of our map; at least two different points are needed. Try again:"
                )?,
                Err(RequestError::Snap(e)) => writeln!(out, "Cannot use these points: {e}. Try again:")?,
            }
        }
    }

    /// URL prompt, warning, menu, repeat. Returns the process exit code.
    pub fn run(&mut self, input: &mut impl BufRead, out: &mut impl Write) -> io::Result<i32> {
        loop {
            if !self.prompt_url(input, out)? {
                return Ok(0);
            }
            writeln!(out, "{GRAPH_WARNING}")?;
            loop {
                match self.show_menu(input, out)? {
                    Choice::Exit => return Ok(0),
                    Choice::ChangeUrl => break,
                    choice => {
                        self.execute_choice(choice, out)?;
                    }
                }
            }
        }
    }
}

/// Reads one line; `None` at end of input. Invalid UTF-8 is replaced rather
/// than rejected.
fn read_line(input: &mut impl BufRead) -> io::Result<Option<String>> {
    let mut buf = Vec::new();
    if input.read_until(b'\n', &mut buf)? == 0 {
        return Ok(None);
    }
    Ok(Some(String::from_utf8_lossy(&buf).trim().to_string()))
}

/// Prints the start-up banner, loads the graph and reports the load time.
/// `None` means the files could not be loaded (already reported).
pub fn load_with_banner(
    vertices: &Path,
    edges: &Path,
    directed: bool,
    out: &mut impl Write,
) -> io::Result<Option<CityGraph>> {
    writeln!(out, "Initializing ...")?;
    out.flush()?;
    match load_city_graph(vertices, edges, directed) {
        Ok((graph, elapsed)) => {
            writeln!(out, "Time required to build graph: {:.3}s", elapsed.as_secs_f64())?;
            Ok(Some(graph))
        }
        Err(e) => {
            writeln!(out, "Could not load the city graph: {e}")?;
            Ok(None)
        }
    }
}

/// Full interactive session. Exit code 0 on user exit, 1 when the graph
/// cannot be loaded.
pub fn run_session(
    vertices: &Path,
    edges: &Path,
    directed: bool,
    options: SessionOptions,
    input: &mut impl BufRead,
    out: &mut impl Write,
) -> io::Result<i32> {
    let Some(graph) = load_with_banner(vertices, edges, directed, out)? else {
        return Ok(1);
    };
    Session::new(&graph, options).run(input, out)
}

/// One-shot mode: load `url`, run `choice`, print the route. Exit code 2
/// when the URL or choice is rejected.
pub fn run_scripted(
    graph: &CityGraph,
    options: SessionOptions,
    url: &str,
    choice: Choice,
    out: &mut impl Write,
) -> io::Result<i32> {
    let mut session = Session::new(graph, options);
    match session.set_url(url, out)? {
        Ok(()) => {}
        Err(RequestError::Url(e)) => {
            writeln!(out, "{e}")?;
            return Ok(2);
        }
        Err(RequestError::Snap(e)) => {
            writeln!(out, "Cannot use these points: {e}")?;
            return Ok(2);
        }
    }
    writeln!(out, "{GRAPH_WARNING}")?;
    if choice == Choice::Exact && !session.exact_available() {
        writeln!(
            out,
            "The exact option is not available for more than {MENU_EXACT_LIMIT} points without extreme mode."
        )?;
        return Ok(2);
    }
    Ok(match session.execute_choice(choice, out)? {
        Some(_) => 0,
        None => 2,
    })
}
