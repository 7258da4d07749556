// Copyright 2026 The kgap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgap/cli.hpp"

#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "kgap/ablation.hpp"
#include "kgap/classifier.hpp"
#include "kgap/config.hpp"
#include "kgap/corpus.hpp"
#include "kgap/errors.hpp"
#include "kgap/live.hpp"
#include "kgap/metrics.hpp"
#include "kgap/queries.hpp"
#include "kgap/simulator.hpp"
#include "kgap/text.hpp"

namespace kgap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Overrides {
    std::string config;
    std::string mode;
    std::string corpus, index, queries, qrels, traces, annotations, out_dir;
    std::string generation_fixture;
    std::optional<std::size_t> concurrency, max_depth, branching, top_k;
    std::string answerer;
};

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "Engine config file (JSON)");
    cmd->add_option("--mode", o.mode, "offline or live")->check(CLI::IsMember({"offline", "live"}));
}

void set_path(std::optional<fs::path>& slot, const std::string& flag) {
    if (!flag.empty()) slot = fs::path(flag).lexically_normal();
}

EngineConfig resolve(const Overrides& o) {
    EngineConfig c = o.config.empty() ? EngineConfig{} : EngineConfig::load(o.config);
    if (o.mode == "offline") c.mode = EngineMode::Offline;
    if (o.mode == "live") c.mode = EngineMode::Live;
    set_path(c.paths.corpus, o.corpus);
    set_path(c.paths.index, o.index);
    set_path(c.paths.queries, o.queries);
    set_path(c.paths.qrels, o.qrels);
    set_path(c.paths.traces, o.traces);
    set_path(c.paths.annotations, o.annotations);
    set_path(c.paths.output_dir, o.out_dir);
    set_path(c.generation_fixture, o.generation_fixture);
    if (o.concurrency) c.concurrency = *o.concurrency;
    if (o.max_depth) c.loop.max_depth = *o.max_depth;
    if (o.branching) c.loop.branching = *o.branching;
    if (o.top_k) c.loop.top_k_initial = *o.top_k;
    if (o.answerer == "extractive") c.answerer = EngineConfig::AnswererKind::Extractive;
    if (o.answerer == "generative") c.answerer = EngineConfig::AnswererKind::Generative;
    return c;
}

const fs::path& need(const std::optional<fs::path>& p, const char* what) {
    if (!p) throw ConfigError(std::string("no ") + what + " path given (set it in the config or pass the flag)");
    return *p;
}

fs::path output_dir(const EngineConfig& c) {
    const auto& dir = need(c.paths.output_dir, "output directory");
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw DataError("failed writing '" + path.string() + "'");
}

void echo_config(const EngineConfig& c, const fs::path& dir) {
    write_file(dir / "effective_config.json", c.to_json().dump(2) + "\n");
}

Index load_index(const EngineConfig& c) {
    if (c.paths.corpus) return Index::build(ingest(*c.paths.corpus));
    return Index::load(need(c.paths.index, "corpus or index"));
}

/// Live or scripted providers for one command, owned together.
struct Providers {
    std::unique_ptr<SearchProvider> search;
    std::unique_ptr<GenerationProvider> generation;

    GenerationProvider& need_generation(const char* purpose) const {
        if (!generation) {
            throw ConfigError(std::string(purpose) +
                              " needs a generation provider; set generation.fixture (offline) or use live mode");
        }
        return *generation;
    }
};

Providers make_providers(const EngineConfig& c, bool with_search) {
    Providers p;
    if (c.mode == EngineMode::Live) {
        auto transport = std::make_shared<HttplibTransport>();
        // Both constructors read their credentials before any request.
        if (with_search) p.search = std::make_unique<LiveSearch>(*c.search_endpoint, transport);
        p.generation = std::make_unique<LiveGeneration>(*c.generation_endpoint, transport);
        return p;
    }
    if (with_search) p.search = std::make_unique<IndexSearchAdapter>(load_index(c));
    if (c.generation_fixture) {
        p.generation = std::make_unique<ScriptedGeneration>(ScriptedGeneration::load(*c.generation_fixture));
    }
    return p;
}

JargonOptions jargon_options(const EngineConfig& c) {
    JargonOptions o;
    if (c.jargon_lexicon) o.jargon = Lexicon::load(*c.jargon_lexicon);
    if (c.common_words) o.common = Lexicon::load(*c.common_words);
    return o;
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const Overrides& o, std::ostream& out) {
    EngineConfig c = resolve(o);
    const auto& corpus_path = need(c.paths.corpus, "corpus");
    const auto& index_path = need(c.paths.index, "index");
    Corpus corpus = ingest(corpus_path);
    Index index = Index::build(corpus);
    if (index_path.has_parent_path()) fs::create_directories(index_path.parent_path());
    index.save(index_path);
    out << "indexed " << index.documents().size() << " documents, " << index.terms().size() << " terms -> "
        << index_path.generic_string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const Overrides& o, std::ostream& out, std::ostream& err) {
    EngineConfig c = resolve(o);
    c.validate();
    const auto queries = load_queries(need(c.paths.queries, "queries"));
    const fs::path dir = output_dir(c);

    Providers providers = make_providers(c, true);
    const NoAnswerPolicy policy = c.no_answer_policy();

    std::unique_ptr<Answerer> answerer;
    if (c.answerer == EngineConfig::AnswererKind::Extractive) {
        answerer = std::make_unique<ExtractiveAnswerer>(c.min_overlap, policy);
    } else {
        answerer = std::make_unique<GenerativeAnswerer>(providers.need_generation("the generative answerer"), policy,
                                                        c.generation_params);
    }

    SubqueryReformulator subqueries;
    std::unique_ptr<PromptedReformulator> prompted;
    QueryReformulator* reformulator = &subqueries;
    if (c.effective_reformulator() == EngineConfig::ReformulatorKind::Generation && c.loop.alt_queries_max > 0) {
        prompted = std::make_unique<PromptedReformulator>(providers.need_generation("prompted reformulation"),
                                                          PromptTemplate(c.reformulation_prompt), c.generation_params);
        reformulator = prompted.get();
    }

    GenerationProvider* followups = nullptr;
    if (c.loop.max_depth > 0) followups = &providers.need_generation("follow-up generation");

    SimulationProviders sim{*providers.search, *answerer, *reformulator, followups,
                            PromptTemplate(c.followup_prompt), c.generation_params};

    TraceStore store;
    std::vector<std::exception_ptr> failures(queries.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < queries.size(); i = next++) {
            try {
                SimulationTrace trace = run_simulation(queries[i], sim, c.loop);
                trace.sentinel = policy.sentinel;
                store.put(std::move(trace));
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    {
        const std::size_t n = std::min<std::size_t>(c.concurrency, std::max<std::size_t>(queries.size(), 1));
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < n; ++t) pool.emplace_back(worker);
    }
    for (std::size_t i = 0; i < failures.size(); ++i) {
        if (!failures[i]) continue;
        try {
            std::rethrow_exception(failures[i]);
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            throw DataError("query '" + queries[i].id + "': " + e.what());
        }
    }

    std::vector<std::string> ids;
    for (const auto& q : queries) ids.push_back(q.id);
    const auto traces = store.ordered(ids);

    std::ostringstream trace_text;
    for (const auto& t : traces) write_trace(trace_text, t);
    write_file(dir / "traces.jsonl", trace_text.str());
    const ReportSummary summary = summarize(traces, nullptr);
    emit_report(summary, ReportFormat::Json, dir / "report.json");
    emit_report(summary, ReportFormat::Table, dir / "report.txt");
    echo_config(c, dir);

    std::size_t incomplete = 0;
    for (const auto& t : traces) {
        out << t.query_id << ": nodes=" << t.totals.nodes << " answers=" << t.totals.answers
            << " sources=" << t.totals.sources << " gaps=" << t.gap_records.size();
        if (t.complete) {
            const auto td = topic_depth(t);
            out << " depth=" << td.depth << (td.censored ? " (censored)" : "");
        } else {
            ++incomplete;
            out << " INCOMPLETE";
            err << "kgap: " << t.query_id << ": " << t.error << "\n";
        }
        out << "\n";
    }
    out << traces.size() << " simulations -> " << (dir / "traces.jsonl").generic_string() << "\n";
    return incomplete > 0 ? kExitProvider : kExitOk;
}

// ---------------------------------------------------------------- classify

int cmd_classify(const Overrides& o, const std::string& out_path, bool judge, std::ostream& out) {
    EngineConfig c = resolve(o);
    if (judge) c.classifier_judge = true;
    const auto queries = load_queries(need(c.paths.queries, "queries"));

    ClassifierConfig cc;
    cc.jargon = jargon_options(c);
    cc.params = c.generation_params;
    Providers providers;
    if (c.classifier_judge) {
        providers = make_providers(c, false);
        cc.judge = &providers.need_generation("the classifier judge");
    }

    std::ostringstream records;
    std::size_t easy = 0;
    for (const auto& q : queries) {
        const auto report = classify(q.text, cc);
        easy += report.final == Verdict::Easy ? 1 : 0;
        write_complexity_record(records, q.id, report);
    }

    fs::path target;
    if (!out_path.empty()) target = out_path;
    else if (c.paths.output_dir) target = output_dir(c) / "complexity.jsonl";
    if (target.empty()) {
        out << records.str();
    } else {
        if (target.has_parent_path()) fs::create_directories(target.parent_path());
        write_file(target, records.str());
        out << queries.size() << " queries classified (" << easy << " easy, " << queries.size() - easy
            << " difficult) -> " << target.generic_string() << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- annotate

fs::path traces_path(const EngineConfig& c) {
    if (c.paths.traces) return *c.paths.traces;
    if (c.paths.output_dir) return *c.paths.output_dir / "traces.jsonl";
    throw ConfigError("no traces path given (set paths.traces or paths.output_dir, or pass --traces)");
}

fs::path annotations_path(const EngineConfig& c) {
    if (c.paths.annotations) return *c.paths.annotations;
    if (c.paths.output_dir) return *c.paths.output_dir / "annotations.jsonl";
    throw ConfigError("no annotation store given (set paths.annotations or pass --annotations)");
}

std::vector<AnnotationRecord> read_verdict_file(const fs::path& path, const std::string& reviewer,
                                                const std::string& timestamp) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read verdict file '" + path.string() + "'");
    std::vector<AnnotationRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty() || trim(line).front() == '#') continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        std::vector<std::string> fields;
        std::stringstream ss(line);
        for (std::string f; std::getline(ss, f, '\t');) fields.push_back(std::string(trim(f)));
        if (fields.size() < 3 || fields.size() > 5) {
            throw DataError(where + ": expected seed_query<TAB>depth<TAB>verdict[<TAB>reviewer[<TAB>timestamp]]");
        }
        AnnotationRecord r;
        r.key.seed_query = fields[0];
        try {
            std::size_t used = 0;
            const long long d = std::stoll(fields[1], &used);
            if (used != fields[1].size() || d < 0) throw std::invalid_argument(fields[1]);
            r.key.depth = static_cast<std::size_t>(d);
        } catch (const std::exception&) {
            throw DataError(where + ": depth '" + fields[1] + "' is not a non-negative integer");
        }
        try {
            r.verdict = review_verdict_from_string(fields[2]);
        } catch (const Error& e) {
            throw DataError(where + ": " + e.what());
        }
        r.reviewer = fields.size() > 3 && !fields[3].empty() ? fields[3] : reviewer;
        r.timestamp = fields.size() > 4 && !fields[4].empty() ? fields[4] : timestamp;
        records.push_back(std::move(r));
    }
    return records;
}

int cmd_annotate(const Overrides& o, const std::string& verdicts, const std::string& reviewer,
                 const std::string& timestamp, std::ostream& out) {
    EngineConfig c = resolve(o);
    const auto traces = load_traces(traces_path(c));
    const fs::path store_path = annotations_path(c);
    const std::string ts = timestamp.empty() ? utc_timestamp_now() : timestamp;
    if (!is_iso8601_timestamp(ts)) throw ConfigError("--timestamp '" + ts + "' is not ISO-8601");

    AnnotationStore store = AnnotationStore::load(store_path, traces);
    const auto records = read_verdict_file(verdicts, reviewer, ts);
    // Validate the whole batch before anything reaches the store file.
    for (const auto& r : records) {
        try {
            store.record(r, traces);
        } catch (const DataError& e) {
            throw DataError(std::string("verdict for '") + r.key.seed_query + "' depth " +
                            std::to_string(r.key.depth) + ": " + e.what());
        }
    }
    if (store_path.has_parent_path()) fs::create_directories(store_path.parent_path());
    for (const auto& r : records) AnnotationStore::append_to(store_path, r);
    out << records.size() << " verdicts recorded; " << store.effective().size() << " answers annotated -> "
        << store_path.generic_string() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------- report

int cmd_report(const Overrides& o, const std::string& format, std::ostream& out) {
    EngineConfig c = resolve(o);
    const auto traces = load_traces(traces_path(c));
    std::optional<AnnotationStore> store;
    if (c.paths.annotations || c.paths.output_dir) {
        store = AnnotationStore::load(annotations_path(c), traces);
    }
    if (!store || store->effective().empty()) {
        throw UndefinedMetric("accuracy is undefined: the annotation store holds no verdicts");
    }
    const ReportSummary summary = summarize(traces, &*store);
    if (!summary.accuracy) {
        throw UndefinedMetric("accuracy is undefined: no annotated answer belongs to a complete trace");
    }
    if (c.paths.output_dir) {
        const fs::path dir = output_dir(c);
        emit_report(summary, ReportFormat::Json, dir / "report.json");
        emit_report(summary, ReportFormat::Table, dir / "report.txt");
        echo_config(c, dir);
    }
    out << render_report(summary, format == "json" ? ReportFormat::Json : ReportFormat::Table);
    return kExitOk;
}

// ---------------------------------------------------------------- ablate

struct AblateArgs {
    bool synthetic = false;
    SyntheticSpec spec;
    std::vector<std::string> ablate_ids;
    std::optional<std::size_t> ablate_count;
    std::string removal = "all";
    bool full_depth = false;
    bool no_alt_queries = false;
};

Removal parse_removal(const std::string& text) {
    if (text == "all") return Removal::all();
    double f = 0.0;
    try {
        std::size_t used = 0;
        f = std::stod(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
    } catch (const std::exception&) {
        throw ConfigError("--removal must be 'all' or a fraction in (0, 1], got '" + text + "'");
    }
    return Removal::fraction(f);
}

int cmd_ablate(const Overrides& o, const AblateArgs& a, std::ostream& out) {
    EngineConfig c = resolve(o);
    if (c.mode != EngineMode::Offline) throw ConfigError("ablate runs offline only");
    const Removal removal = parse_removal(a.removal);

    Corpus corpus;
    std::vector<QueryRecord> queries;
    Qrels qrels;
    if (a.synthetic) {
        auto collection = generate_synthetic_collection(a.spec);
        corpus = std::move(collection.corpus);
        queries = std::move(collection.queries);
        qrels = std::move(collection.qrels);
    } else {
        corpus = ingest(need(c.paths.corpus, "corpus"));
        queries = load_queries(need(c.paths.queries, "queries"));
        qrels = Qrels::load(need(c.paths.qrels, "qrels"));
        qrels.validate(corpus, queries);
    }

    std::vector<std::string> ablate = a.ablate_ids;
    if (ablate.empty()) {
        const std::size_t n = a.ablate_count.value_or(queries.size() / 2);
        if (n > queries.size()) throw ConfigError("--ablate-count exceeds the number of queries");
        for (std::size_t i = 0; i < n; ++i) ablate.push_back(queries[i].id);
    }
    const AblationPlan plan = plan_ablation(qrels, ablate, removal);

    McqOptions options;
    options.loop = c.loop;
    options.full_depth = a.full_depth;
    options.use_alt_queries = !a.no_alt_queries;
    options.min_overlap = c.min_overlap;
    options.policy = c.no_answer_policy();
    Providers providers;
    if (a.full_depth && c.loop.max_depth > 0) {
        if (c.generation_fixture) {
            providers.generation =
                std::make_unique<ScriptedGeneration>(ScriptedGeneration::load(*c.generation_fixture));
        }
        options.followups = &providers.need_generation("--full-depth");
    }

    const McqResult result = run_mcq_eval(corpus, qrels, queries, plan, options);
    if (c.paths.output_dir) {
        const fs::path dir = output_dir(c);
        write_file(dir / "mcq.json", render_mcq_json(result, plan));
        write_file(dir / "mcq.txt", render_mcq_table(result));
        if (a.synthetic) {
            std::ostringstream corpus_text, query_text, qrels_text;
            write_corpus(corpus_text, corpus);
            write_queries(query_text, queries);
            qrels.write(qrels_text);
            write_file(dir / "synthetic_corpus.jsonl", corpus_text.str());
            write_file(dir / "synthetic_queries.jsonl", query_text.str());
            write_file(dir / "synthetic_qrels.txt", qrels_text.str());
        }
        echo_config(c, dir);
    }
    out << render_mcq_table(result);
    return kExitOk;
}

int exit_for(const std::exception& e, std::ostream& err) {
    err << "kgap: error: " << e.what() << "\n";
    if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
    if (dynamic_cast<const DataError*>(&e)) return kExitData;
    if (dynamic_cast<const ProviderError*>(&e)) return kExitProvider;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return kExitData;
    return kExitFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Knowledge-gap exploration engine"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "kgap 0.1.0");

    Overrides o;
    std::string out_path, format = "table", verdicts, reviewer, timestamp;
    bool judge = false;
    AblateArgs ablate_args;

    auto* ingest_cmd = app.add_subcommand("ingest", "Build and save a search index from a corpus file");
    add_common(ingest_cmd, o);
    ingest_cmd->add_option("--corpus", o.corpus, "Corpus JSONL");
    ingest_cmd->add_option("--index", o.index, "Index file to write");

    auto* simulate_cmd = app.add_subcommand("simulate", "Run exploration sessions for a query file");
    add_common(simulate_cmd, o);
    simulate_cmd->add_option("--queries", o.queries, "Query JSONL");
    simulate_cmd->add_option("--corpus", o.corpus, "Corpus JSONL (offline)");
    simulate_cmd->add_option("--index", o.index, "Saved index (offline, used when no corpus is given)");
    simulate_cmd->add_option("--out-dir", o.out_dir, "Directory for traces, reports and the effective config");
    simulate_cmd->add_option("--generation-fixture", o.generation_fixture, "Scripted generation JSONL (offline)");
    simulate_cmd->add_option("--concurrency", o.concurrency, "Simulations run in parallel");
    simulate_cmd->add_option("--max-depth", o.max_depth, "Follow-up depth budget");
    simulate_cmd->add_option("--branching", o.branching, "Follow-ups expanded per answered node");
    simulate_cmd->add_option("--top-k", o.top_k, "Results retrieved for each query");
    simulate_cmd->add_option("--answerer", o.answerer, "extractive or generative")
        ->check(CLI::IsMember({"extractive", "generative"}));

    auto* classify_cmd = app.add_subcommand("classify", "Rate the complexity of each query");
    add_common(classify_cmd, o);
    classify_cmd->add_option("--queries", o.queries, "Query JSONL");
    classify_cmd->add_option("--out", out_path, "Output JSONL (default: <out-dir>/complexity.jsonl or stdout)");
    classify_cmd->add_option("--out-dir", o.out_dir, "Output directory");
    classify_cmd->add_option("--generation-fixture", o.generation_fixture, "Scripted judge JSONL (offline)");
    classify_cmd->add_flag("--judge", judge, "Also judge the model-rated criteria");

    auto* annotate_cmd = app.add_subcommand("annotate", "Apply a verdict file to the annotation store");
    add_common(annotate_cmd, o);
    annotate_cmd->add_option("--verdicts", verdicts, "TSV of seed_query, depth, verdict[, reviewer[, timestamp]]")
        ->required();
    annotate_cmd->add_option("--traces", o.traces, "Trace JSONL");
    annotate_cmd->add_option("--annotations", o.annotations, "Annotation store JSONL");
    annotate_cmd->add_option("--out-dir", o.out_dir, "Directory holding traces.jsonl and annotations.jsonl");
    annotate_cmd->add_option("--reviewer", reviewer, "Reviewer for lines that name none");
    annotate_cmd->add_option("--timestamp", timestamp, "ISO-8601 time for lines that give none (default: now)");

    auto* report_cmd = app.add_subcommand("report", "Aggregate traces and annotations");
    add_common(report_cmd, o);
    report_cmd->add_option("--traces", o.traces, "Trace JSONL");
    report_cmd->add_option("--annotations", o.annotations, "Annotation store JSONL");
    report_cmd->add_option("--out-dir", o.out_dir, "Directory for report.json and report.txt");
    report_cmd->add_option("--format", format, "Console format")->check(CLI::IsMember({"json", "table"}));

    auto* ablate_cmd = app.add_subcommand("ablate", "Missing-content evaluation by removing relevant documents");
    add_common(ablate_cmd, o);
    ablate_cmd->add_option("--corpus", o.corpus, "Corpus JSONL");
    ablate_cmd->add_option("--queries", o.queries, "Query JSONL");
    ablate_cmd->add_option("--qrels", o.qrels, "Relevance judgments");
    ablate_cmd->add_option("--out-dir", o.out_dir, "Output directory");
    ablate_cmd->add_option("--generation-fixture", o.generation_fixture, "Scripted follow-ups for --full-depth");
    ablate_cmd->add_flag("--synthetic", ablate_args.synthetic, "Use a generated collection");
    ablate_cmd->add_option("--synthetic-queries", ablate_args.spec.queries, "Generated queries");
    ablate_cmd->add_option("--synthetic-distractors", ablate_args.spec.distractors, "Generated distractor documents");
    ablate_cmd->add_option("--synthetic-relevant", ablate_args.spec.relevant_per_query,
                           "Relevant documents per generated query");
    ablate_cmd->add_option("--seed", ablate_args.spec.seed, "Generator seed");
    ablate_cmd->add_option("--ablate", ablate_args.ablate_ids, "Query ids to ablate")->delimiter(',');
    ablate_cmd->add_option("--ablate-count", ablate_args.ablate_count,
                           "Ablate the first N queries (default: half)");
    ablate_cmd->add_option("--removal", ablate_args.removal, "all, or a fraction in (0, 1]");
    ablate_cmd->add_flag("--full-depth", ablate_args.full_depth, "Predict gaps from the full descent");
    ablate_cmd->add_flag("--no-alt-queries", ablate_args.no_alt_queries, "Skip the alternative-query round");
    ablate_cmd->add_option("--max-depth", o.max_depth, "Follow-up depth budget with --full-depth");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) reversed.pop_back();  // program name
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (ingest_cmd->parsed()) return cmd_ingest(o, out);
        if (simulate_cmd->parsed()) return cmd_simulate(o, out, err);
        if (classify_cmd->parsed()) return cmd_classify(o, out_path, judge, out);
        if (annotate_cmd->parsed()) return cmd_annotate(o, verdicts, reviewer, timestamp, out);
        if (report_cmd->parsed()) return cmd_report(o, format, out);
        if (ablate_cmd->parsed()) return cmd_ablate(o, ablate_args, out);
    } catch (const std::exception& e) {
        return exit_for(e, err);
    }
    return kExitFailure;
}

}  // namespace kgap::cli
