//! Deterministic synthetic seed corpus of answerable single-table questions.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::example::LabeledExample;
use crate::schema::TableSchema;
use crate::sql::{Aggregation, Condition, Operator, SqlQuery};

#[derive(Debug, Clone, Copy)]
enum Values {
    Text(&'static [&'static str]),
    Person,
    Int(i64, i64),
    Decimal(i64, i64),
    Year,
    Date,
    Tally,
}

impl Values {
    fn numeric(self) -> bool {
        matches!(self, Values::Int(..) | Values::Decimal(..) | Values::Year)
    }

    fn sample(self, rng: &mut ChaCha8Rng) -> String {
        match self {
            Values::Text(pool) => pool.choose(rng).unwrap().to_string(),
            Values::Person => format!("{} {}", FIRST.choose(rng).unwrap(), LAST.choose(rng).unwrap()),
            Values::Int(lo, hi) => rng.gen_range(lo..=hi).to_string(),
            Values::Decimal(lo, hi) => format!("{:.1}", rng.gen_range(lo * 10..=hi * 10) as f64 / 10.0),
            Values::Year => rng.gen_range(1960..=2023).to_string(),
            Values::Date => {
                format!("{} {}, {}", MONTHS.choose(rng).unwrap(), rng.gen_range(1..=28), rng.gen_range(1980..=2020))
            }
            Values::Tally => format!("{}–{}", rng.gen_range(0..=12), rng.gen_range(0..=12)),
        }
    }
}

struct Column {
    name: &'static str,
    values: Values,
    /// Other ways a question may refer to the column.
    aliases: &'static [&'static str],
}

const fn col(name: &'static str, values: Values, aliases: &'static [&'static str]) -> Column {
    Column { name, values, aliases }
}

struct Domain {
    table: &'static str,
    /// Column whose values name a row ("the runtime of Avatar").
    key: usize,
    columns: &'static [Column],
}

const FIRST: &[&str] = &[
    "James", "Maria", "Chen", "Aisha", "Tom", "Elena", "Kofi", "Yuki", "Pedro", "Anna", "Omar", "Grace", "Lars",
    "Priya", "Mateo", "Sofia", "Ivan", "Nadia", "Hugo", "Leah",
];
const LAST: &[&str] = &[
    "Smith", "Garcia", "Wong", "Okafor", "Novak", "Rossi", "Tanaka", "Silva", "Larsen", "Patel", "Haddad", "Kim",
    "Murphy", "Dubois", "Fischer", "Costa", "Moreno", "Khan", "Berg", "Lopez",
];
const MONTHS: &[&str] = &[
    "January",
    "February",
    "March",
    "April",
    "May",
    "June",
    "July",
    "August",
    "September",
    "October",
    "November",
    "December",
];
const CITIES: &[&str] = &[
    "Boston", "Denver", "Austin", "Seattle", "Chicago", "Portland", "Atlanta", "Phoenix", "Toronto", "Dallas", "Miami",
    "Detroit",
];
const TEAMS: &[&str] = &[
    "Boston Hawks",
    "Denver Miners",
    "Austin Comets",
    "Seattle Tides",
    "Chicago Blaze",
    "Portland Pines",
    "Atlanta Flyers",
    "Phoenix Suns",
    "Dallas Riders",
    "Miami Waves",
];

const DOMAINS: &[Domain] = &[
    Domain {
        table: "movies",
        key: 0,
        columns: &[
            col(
                "Title",
                Values::Text(&[
                    "Avatar",
                    "The Godfather",
                    "Inception",
                    "Heat",
                    "Casablanca",
                    "Vertigo",
                    "Alien",
                    "Jaws",
                    "Up",
                    "Rocky",
                    "Titanic",
                    "Psycho",
                ]),
                &["film", "movie"],
            ),
            col("Year", Values::Year, &["release year"]),
            col("Director", Values::Person, &["filmmaker"]),
            col("IMDB Rating", Values::Decimal(4, 9), &["imdb score"]),
            col("Rotten Tomatoes Rating", Values::Int(20, 99), &["tomatometer"]),
            col("Content Rating", Values::Text(&["G", "PG", "PG-13", "R"]), &["age rating"]),
            col("Runtime", Values::Int(80, 190), &["length", "running time"]),
            col("Genre", Values::Text(&["Drama", "Comedy", "Horror", "Action", "Thriller", "Animation"]), &["kind"]),
        ],
    },
    Domain {
        table: "phones",
        key: 0,
        columns: &[
            col(
                "Model",
                Values::Text(&[
                    "Galaxy S10",
                    "Pixel 4",
                    "Xperia Z",
                    "Moto G",
                    "Nokia 8",
                    "Mate 20",
                    "Zenfone 6",
                    "OnePlus 7",
                ]),
                &["handset"],
            ),
            col(
                "Brand",
                Values::Text(&["Samsung", "Google", "Sony", "Motorola", "Nokia", "Huawei", "Asus", "OnePlus"]),
                &["maker", "manufacturer"],
            ),
            col("Price", Values::Int(99, 1299), &["cost"]),
            col("Storage", Values::Text(&["32 GB", "64 GB", "128 GB", "256 GB"]), &["memory"]),
            col("Screen Size", Values::Decimal(4, 7), &["display size"]),
            col("Battery", Values::Int(2000, 5000), &["battery capacity"]),
            col("Release Year", Values::Year, &["launch year"]),
        ],
    },
    Domain {
        table: "games",
        key: 2,
        columns: &[
            col("Week", Values::Int(1, 17), &["round"]),
            col("Date", Values::Date, &["day"]),
            col("Opponent", Values::Text(TEAMS), &["rival"]),
            col("Score", Values::Tally, &["final score", "result"]),
            col("Record", Values::Tally, &["standing"]),
            col("Attendance", Values::Int(8000, 80000), &["crowd"]),
            col("Location", Values::Text(CITIES), &["venue"]),
        ],
    },
    Domain {
        table: "players",
        key: 0,
        columns: &[
            col("Player", Values::Person, &["athlete"]),
            col(
                "Position",
                Values::Text(&["Guard", "Forward", "Center", "Goalkeeper", "Defender", "Striker"]),
                &["role"],
            ),
            col("Team", Values::Text(TEAMS), &["club"]),
            col("Date of Birth", Values::Date, &["birthday", "birth date"]),
            col("Place of Birth", Values::Text(CITIES), &["hometown", "birthplace"]),
            col("Games Played", Values::Int(1, 82), &["appearances"]),
            col("Points", Values::Int(0, 2400), &["pts"]),
            col("Height", Values::Text(&["6-1", "6-4", "5-11", "6-8", "7-0"]), &["tall"]),
        ],
    },
    Domain {
        table: "elections",
        key: 0,
        columns: &[
            col(
                "District",
                Values::Text(&["Ohio 1", "Ohio 2", "Texas 4", "Texas 9", "Iowa 3", "Utah 2", "Maine 1"]),
                &["seat"],
            ),
            col("Incumbent", Values::Person, &["officeholder"]),
            col("Party", Values::Text(&["Democratic", "Republican", "Independent", "Green"]), &["affiliation"]),
            col("First Elected", Values::Year, &["first won"]),
            col("Result", Values::Text(&["Re-elected", "Retired", "Lost re-election", "Defeated"]), &["outcome"]),
            col("Votes", Values::Int(10000, 400000), &["ballots"]),
        ],
    },
    Domain {
        table: "sales",
        key: 0,
        columns: &[
            col("Region", Values::Text(&["North", "South", "East", "West", "Central"]), &["area", "territory"]),
            col("Sales", Values::Int(1000, 90000), &["turnover"]),
            col("Quarter", Values::Text(&["Q1", "Q2", "Q3", "Q4"]), &["period"]),
            col("Product", Values::Text(&["Laptop", "Monitor", "Keyboard", "Router", "Printer", "Tablet"]), &["item"]),
            col("Revenue", Values::Int(5000, 500000), &["income"]),
            col("Units Sold", Values::Int(10, 5000), &["volume"]),
            col("Manager", Values::Person, &["supervisor"]),
        ],
    },
    Domain {
        table: "episodes",
        key: 1,
        columns: &[
            col("Series Number", Values::Int(1, 120), &["episode number"]),
            col(
                "Title",
                Values::Text(&[
                    "Pilot",
                    "The Return",
                    "Lost Signal",
                    "Homecoming",
                    "Old Friends",
                    "Finale",
                    "Crossroads",
                    "Nightfall",
                ]),
                &["episode"],
            ),
            col("Directed by", Values::Person, &["director"]),
            col("Written by", Values::Person, &["writer"]),
            col("Original Air Date", Values::Date, &["premiere"]),
            col("Viewers", Values::Decimal(1, 20), &["audience"]),
            col("Production Code", Values::Int(100, 999), &["prod code"]),
        ],
    },
    Domain {
        table: "stations",
        key: 0,
        columns: &[
            col(
                "Call Sign",
                Values::Text(&["KXLU", "WBEZ", "KEXP", "WNYC", "KCRW", "WAMU", "KQED"]),
                &["callsign", "call letters"],
            ),
            col("City", Values::Text(CITIES), &["town"]),
            col("Frequency", Values::Decimal(88, 107), &["dial position"]),
            col("Format", Values::Text(&["News", "Jazz", "Country", "Talk", "Classical", "Rock"]), &["genre"]),
            col("Owner", Values::Person, &["licensee"]),
            col("Power", Values::Int(1, 100), &["wattage"]),
        ],
    },
    Domain {
        table: "schools",
        key: 0,
        columns: &[
            col(
                "School",
                Values::Text(&[
                    "Lincoln High",
                    "Oak Ridge",
                    "Riverside",
                    "Westfield",
                    "Hillcrest",
                    "Maple Grove",
                    "Central Prep",
                ]),
                &["institution"],
            ),
            col("Location", Values::Text(CITIES), &["town"]),
            col("Enrollment", Values::Int(200, 4000), &["students"]),
            col("Founded", Values::Year, &["established"]),
            col("Mascot", Values::Text(&["Eagles", "Tigers", "Bears", "Wolves", "Falcons", "Lions"]), &["emblem"]),
            col("Conference", Values::Text(&["Metro", "Valley", "Coastal", "Northern", "Capital"]), &["league"]),
        ],
    },
    Domain {
        table: "races",
        key: 0,
        columns: &[
            col(
                "Race",
                Values::Text(&[
                    "Monaco Grand Prix",
                    "Italian Grand Prix",
                    "Japanese Grand Prix",
                    "British Grand Prix",
                    "Brazilian Grand Prix",
                ]),
                &["event"],
            ),
            col("Circuit", Values::Text(&["Monza", "Suzuka", "Silverstone", "Interlagos", "Spa"]), &["track"]),
            col("Date", Values::Date, &["day"]),
            col("Pole Position", Values::Person, &["pole"]),
            col("Winning Driver", Values::Person, &["winner"]),
            col("Laps", Values::Int(44, 78), &["lap count"]),
        ],
    },
];

struct Table {
    schema: TableSchema,
    /// Indices into the domain's column list, in schema order.
    columns: Vec<usize>,
    rows: Vec<Vec<String>>,
}

fn make_table(domain: &Domain, index: usize, rng: &mut ChaCha8Rng) -> Table {
    let n = domain.columns.len();
    let keep = rng.gen_range(n.min(5)..=n);
    let mut columns: Vec<usize> = (0..n).filter(|&c| c != domain.key).collect();
    columns.shuffle(rng);
    columns.truncate(keep - 1);
    columns.push(domain.key);
    columns.sort_unstable();
    let rows: Vec<Vec<String>> = (0..rng.gen_range(3..=6))
        .map(|_| columns.iter().map(|&c| domain.columns[c].values.sample(rng)).collect())
        .collect();
    let names: Vec<String> = columns.iter().map(|&c| domain.columns[c].name.to_string()).collect();
    let mut schema = TableSchema::new(format!("{}_{index:03}", domain.table), names).expect("static columns are valid");
    for (j, &c) in columns.iter().enumerate() {
        let mut cells: Vec<String> = rows.iter().map(|r| r[j].clone()).collect();
        cells.dedup();
        schema.cells.insert(domain.columns[c].name.to_string(), cells);
    }
    Table { schema, columns, rows }
}

fn mention(column: &Column, rng: &mut ChaCha8Rng) -> String {
    if !column.aliases.is_empty() && rng.gen_bool(0.15) {
        column.aliases.choose(rng).unwrap().to_string()
    } else {
        column.name.to_lowercase()
    }
}

fn value_mention(value: &str, rng: &mut ChaCha8Rng) -> String {
    match value.strip_prefix("The ") {
        Some(rest) if rng.gen_bool(0.3) => rest.to_lowercase(),
        _ if rng.gen_bool(0.2) => value.to_lowercase(),
        _ => value.to_string(),
    }
}

fn select_phrase(agg: Aggregation, s: &str, rng: &mut ChaCha8Rng) -> String {
    let frames: &[&str] = match agg {
        Aggregation::None => &[
            "what is the {}",
            "what was the {}",
            "which {}",
            "name the {}",
            "tell me the {}",
            "list the {}",
            "give the {}",
        ],
        Aggregation::Count => &["how many {}", "what is the number of {}", "count the {}"],
        Aggregation::Sum => &["what is the total {}", "total {}", "what is the sum of {}"],
        Aggregation::Avg => &["what is the average {}", "average {}", "what is the mean {}"],
        Aggregation::Max => &["what is the highest {}", "what is the largest {}", "maximum {}"],
        Aggregation::Min => &["what is the lowest {}", "what is the smallest {}", "minimum {}"],
    };
    frames.choose(rng).unwrap().replace("{}", s)
}

fn condition_phrase(col: &str, value: &str, op: Operator, rng: &mut ChaCha8Rng) -> String {
    let frames: &[&str] = match op {
        Operator::Gt => &["where {c} is greater than {v}", "with {c} more than {v}", "when {c} is over {v}"],
        Operator::Lt => &["where {c} is less than {v}", "with {c} under {v}", "when {c} is below {v}"],
        _ => &[
            "where {c} is {v}",
            "when the {c} was {v}",
            "with a {c} of {v}",
            "for the {c} {v}",
            "when {c} is {v}",
            "that has {c} {v}",
        ],
    };
    frames.choose(rng).unwrap().replace("{c}", col).replace("{v}", value)
}

fn make_question(domain: &Domain, table: &Table, rng: &mut ChaCha8Rng) -> (String, SqlQuery) {
    let cols = &table.columns;
    let row = &table.rows[rng.gen_range(0..table.rows.len())];
    let si = rng.gen_range(0..cols.len());
    let select = &domain.columns[cols[si]];
    let agg = if select.values.numeric() && rng.gen_bool(0.35) {
        *[Aggregation::Sum, Aggregation::Avg, Aggregation::Max, Aggregation::Min, Aggregation::Count]
            .choose(rng)
            .unwrap()
    } else if rng.gen_bool(0.08) {
        Aggregation::Count
    } else {
        Aggregation::None
    };
    let mut question = select_phrase(agg, &mention(select, rng), rng);
    let mut conditions = Vec::new();
    let others: Vec<usize> = (0..cols.len()).filter(|&j| j != si).collect();
    let wanted = *[1usize, 1, 1, 2, 2, 0].choose(rng).unwrap();
    let mut chosen: Vec<usize> = others.choose_multiple(rng, wanted.min(others.len())).copied().collect();
    chosen.sort_unstable();
    let mut parts = Vec::new();
    for j in chosen {
        let column = &domain.columns[cols[j]];
        let value = &row[j];
        let op = if column.values.numeric() && rng.gen_bool(0.3) {
            *[Operator::Gt, Operator::Lt].choose(rng).unwrap()
        } else {
            Operator::Eq
        };
        let value_text = if op == Operator::Eq { value_mention(value, rng) } else { value.clone() };
        let implicit = cols[j] == domain.key && op == Operator::Eq && parts.is_empty() && rng.gen_bool(0.5);
        if implicit {
            question.push_str(&format!(" of {value_text}"));
        } else {
            parts.push(condition_phrase(&mention(column, rng), &value_text, op, rng));
        }
        conditions.push(Condition { column: column.name.to_string(), op, value: value.clone() });
    }
    if !parts.is_empty() {
        question.push(' ');
        question.push_str(&parts.join(" and "));
    }
    if rng.gen_bool(0.7) {
        question.push_str(" ?");
    }
    let mut chars = question.chars();
    let question = match chars.next() {
        Some(c) if rng.gen_bool(0.6) => c.to_uppercase().chain(chars).collect(),
        _ => question,
    };
    let question = question.replace(" ?", "?");
    let sql = SqlQuery {
        select_column: select.name.to_string(),
        aggregation: agg,
        table: table.schema.table_id.clone(),
        conditions,
    };
    (question, sql)
}

/// `n` answerable questions with gold SQL over tables from ten domains. Every table gets
/// four questions; the same `(n, seed)` always yields the same corpus.
pub fn seed_corpus(n: usize, seed: u64) -> Vec<LabeledExample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut table = None;
    for i in 0..n {
        if i % 4 == 0 {
            let d = (i / 4) % DOMAINS.len();
            table = Some((d, make_table(&DOMAINS[d], i / 4, &mut rng)));
        }
        let (d, t) = table.as_ref().unwrap();
        let (question, sql) = make_question(&DOMAINS[*d], t, &mut rng);
        out.push(LabeledExample::unlabeled(question, t.schema.clone(), Some(sql)).expect("generated example is valid"));
    }
    out
}

/// Movie table with three rating columns.
pub fn movie_table() -> TableSchema {
    let columns = ["Title", "Year", "IMDB Rating", "Rotten Tomatoes Rating", "Content Rating", "Director"];
    TableSchema::new("movies", columns.map(String::from).to_vec())
        .and_then(|t| t.with_cells("Title", &["Avatar", "The Godfather", "Inception"]))
        .and_then(|t| t.with_cells("Year", &["2009", "1972", "2010"]))
        .and_then(|t| t.with_cells("IMDB Rating", &["7.9", "9.2", "8.8"]))
        .and_then(|t| t.with_cells("Rotten Tomatoes Rating", &["81", "97", "87"]))
        .and_then(|t| t.with_cells("Content Rating", &["PG-13", "R", "PG-13"]))
        .and_then(|t| t.with_cells("Director", &["James Cameron", "Francis Ford Coppola", "Christopher Nolan"]))
        .expect("static table is valid")
}

/// Phone table without any model-name column.
pub fn phone_table() -> TableSchema {
    let columns = ["Brand", "Price", "Storage", "Release Year"];
    TableSchema::new("phones", columns.map(String::from).to_vec())
        .and_then(|t| t.with_cells("Brand", &["Apple", "Samsung", "Google"]))
        .and_then(|t| t.with_cells("Price", &["999", "799", "599"]))
        .and_then(|t| t.with_cells("Storage", &["128 GB", "256 GB", "64 GB"]))
        .and_then(|t| t.with_cells("Release Year", &["2019", "2020", "2019"]))
        .expect("static table is valid")
}
