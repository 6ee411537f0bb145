// Command-line driver: reproducible experiments over the library modules.
// Subcommands: space, glue, germ, morse, degen, sft, algebra, suite.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "scfred/acceptance.hpp"
#include "scfred/algebra.hpp"
#include "scfred/config.hpp"
#include "scfred/degen.hpp"
#include "scfred/errors.hpp"
#include "scfred/germ.hpp"
#include "scfred/morse.hpp"
#include "scfred/scspace.hpp"
#include "scfred/sftsym.hpp"
#include "scfred/splicing.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace scfred;

namespace {

struct RunContext {
    fs::path out = "out";
    unsigned seed = 42;
    std::string config_hash = fnv1a_hex("");

    void prepare() const { fs::create_directories(out); }

    void stamp(ordered_json& j) const {
        j["seed"] = seed;
        j["config_hash"] = config_hash;
    }

    void write_json(const std::string& name, ordered_json j) const {
        stamp(j);
        std::ofstream f(out / name, std::ios::binary);
        f << j.dump(2) << "\n";
    }

    std::ofstream open_csv(const std::string& name) const {
        std::ofstream f(out / name, std::ios::binary);
        return f;
    }
};

void apply_env_out(RunContext& ctx) {
    if (const char* env = std::getenv("SCFRED_OUT")) ctx.out = env;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

int run_space(const RunContext& ctx, const std::string& config_path, int budget) {
    ctx.prepare();
    scspace::ScaleSpace sp = config_path.empty()
                                 ? scspace::make_scale_space(scspace::DomainSpec::line(10.0, 0.1),
                                                             0, {0.0, 0.5, 1.0}, 1)
                                 : scspace::space_from_config(Config::parse_file(config_path));
    auto sample = scspace::GridFunction::from_line(
        sp,
        [&](double s) {
            Eigen::VectorXd v(sp.target_dim());
            for (int i = 0; i < v.size(); ++i) v(i) = std::exp(-s * s / (1.0 + i));
            return v;
        },
        sp.levels_available() - 1);
    {
        auto csv = ctx.open_csv("norms.csv");
        csv << "level,norm\n";
        for (int m = 0; m < sp.levels_available(); ++m)
            csv << m << "," << fmt(scspace::level_norm(sample, m)) << "\n";
    }
    ordered_json j;
    j["domain"] = sp.domain().kind == scspace::DomainKind::Line ? "line" : "cylinder";
    j["levels"] = sp.levels_available();
    j["nodes"] = sp.node_count();
    if (sp.levels_available() >= 2 && sp.node_count() <= 2000) {
        auto rep = scspace::embedding_diagnostic(sp, 0, 1, budget);
        auto csv = ctx.open_csv("embedding.csv");
        csv << "index,singular_value\n";
        for (size_t i = 0; i < rep.singular_values.size(); ++i)
            csv << i << "," << fmt(rep.singular_values[i]) << "\n";
        j["compactness_consistent"] = rep.compactness_consistent;
    }
    ctx.write_json("space_summary.json", std::move(j));
    return 0;
}

int run_glue(const RunContext& ctx, const std::string& profile_name, double r, bool diag) {
    ctx.prepare();
    splicing::GluingProfile profile = profile_name == "logarithmic"
                                          ? splicing::GluingProfile::logarithmic()
                                      : profile_name == "reciprocal"
                                          ? splicing::GluingProfile::reciprocal()
                                          : splicing::GluingProfile::exponential();
    auto sp = scspace::make_scale_space(scspace::DomainSpec::line(10.0, 0.1), 0, {0.0, 0.5}, 1);
    auto mk = [&](double offset) {
        auto g = scspace::GridFunction::from_line(
            sp,
            [&](double s) {
                Eigen::VectorXd v(1);
                v << std::tanh(s) + offset;
                return v;
            },
            1);
        Eigen::VectorXd l(1), rr(1);
        l << offset - 1.0;
        rr << offset + 1.0;
        g.set_asymptotics(l, rr);
        return g;
    };
    auto u = mk(1.0);
    auto v = mk(3.0);
    double R = splicing::profile_length(profile, r);
    auto info = splicing::line_projection_info(sp, profile, r);
    double Reff = info.beyond_window ? std::min(R, 18.0) : info.effective_length;
    auto pair = splicing::total_glue(u, v, Reff);
    double min_det = 1.0;
    if (diag) {
        auto csv = ctx.open_csv("glue.csv");
        csv << "s,beta,glued,antiglued,determinant\n";
        for (int i = 0; i < sp.n_s(); ++i) {
            double s = sp.s_coord(i);
            double b = splicing::beta(s - Reff / 2.0);
            double det = splicing::total_glue_determinant(s - Reff / 2.0);
            min_det = std::min(min_det, det);
            csv << fmt(s) << "," << fmt(b) << "," << fmt(pair.glued.values()(i, 0)) << ","
                << fmt(pair.antiglued.values()(i, 0)) << "," << fmt(det) << "\n";
        }
    }
    ordered_json j;
    j["profile"] = profile.name;
    j["r"] = r;
    j["R"] = R;
    j["R_effective"] = Reff;
    j["shift_mode"] = info.beyond_window ? "clamped" : "rounded";
    j["min_determinant"] = pair.min_determinant;
    if (diag) j["min_determinant_csv"] = min_det;
    ctx.write_json("glue_summary.json", std::move(j));
    return 0;
}

int run_germ(const RunContext& ctx, double v, const std::string& config_path) {
    ctx.prepare();
    if (!config_path.empty()) {
        auto cfg = Config::parse_file(config_path);
        v = cfg.get_double("germ", "v", v);
    }
    auto linear = germ::make_contraction_germ(
        1, 0, 1,
        [](const Eigen::VectorXd& vv, const Eigen::VectorXd& u, int) {
            return (0.5 * u + vv).eval();
        },
        {0.5, 0.5});
    auto sine = germ::make_contraction_germ(
        1, 0, 1,
        [](const Eigen::VectorXd& vv, const Eigen::VectorXd& u, int) {
            Eigen::VectorXd out(1);
            out << vv(0) + 0.3 * std::sin(u(0));
            return out;
        },
        {0.31, 0.31});
    Eigen::VectorXd vv(1);
    vv << v;
    auto csv = ctx.open_csv("germ.csv");
    csv << "germ,iteration,level,residual\n";
    ordered_json j;
    for (auto& [name, g] : {std::pair<std::string, germ::ContractionGerm&>{"linear", linear},
                            {"sine", sine}}) {
        for (int level = 0; level < g.levels(); ++level) {
            auto res = germ::solve_germ(g, vv, level, 1e-14, 500);
            for (size_t i = 0; i < res.residuals.size(); ++i)
                csv << name << "," << i << "," << level << "," << fmt(res.residuals[i]) << "\n";
            j[name]["level_" + std::to_string(level)] = {{"delta", res.u(0)},
                                                         {"iterations", res.iterations},
                                                         {"rate", res.observed_rate}};
        }
    }
    ctx.write_json("germ_summary.json", std::move(j));
    return 0;
}

morse::MorseProblem named_problem(const std::string& name) {
    if (name == "cubic_1d") return morse::cubic_1d();
    if (name == "double_well") return morse::double_well();
    if (name == "chain") return morse::chain_problem();
    if (name == "single_min") return morse::single_min();
    throw DomainError("unknown problem '" + name + "'");
}

int run_morse(const RunContext& ctx, const std::string& name, const std::string& config_path) {
    ctx.prepare();
    morse::MorseProblem problem = [&] {
        if (config_path.empty()) return named_problem(name);
        auto cfg = Config::parse_file(config_path);
        if (cfg.has("morse", "problem")) return named_problem(cfg.get_string("morse", "problem"));
        int dim = static_cast<int>(cfg.get_int("morse", "dim"));
        // terms = "coef e1 .. eN ; coef e1 .. eN ; ..."
        std::string terms = cfg.get_string("morse", "terms");
        std::vector<std::pair<double, std::vector<int>>> parsed;
        std::stringstream ss(terms);
        std::string chunk;
        while (std::getline(ss, chunk, ';')) {
            std::stringstream cs(chunk);
            double coef;
            if (!(cs >> coef)) continue;
            std::vector<int> exps(dim, 0);
            for (int i = 0; i < dim; ++i) cs >> exps[i];
            parsed.emplace_back(coef, exps);
        }
        return morse::polynomial_problem(dim, parsed);
    }();
    morse::locate_critical_points(problem);
    {
        auto csv = ctx.open_csv("criticals.csv");
        csv << "label,value,index";
        for (int i = 0; i < problem.dim; ++i) csv << ",x" << i;
        csv << "\n";
        for (const auto& p : problem.critical_points) {
            csv << p.label << "," << fmt(p.value) << "," << p.index;
            for (int i = 0; i < problem.dim; ++i) csv << "," << fmt(p.location(i));
            csv << "\n";
        }
    }
    morse::EnumerationOptions opts;
    opts.trajectory.L = 12.0;
    opts.trajectory.h = 0.04;
    auto counting = morse::counting_function(problem, opts);
    ordered_json qj;
    for (size_t k = 0; k < counting.pairs.structure.labels.size(); ++k)
        qj[counting.pairs.structure.labels[k]] = counting.Q.values[k];
    ordered_json j;
    j["problem"] = problem.name;
    j["critical_points"] = problem.critical_points.size();
    j["transversality_warning"] = counting.transversality_warning;
    j["counting"] = qj;
    {
        std::ofstream f(ctx.out / "counting.json", std::ios::binary);
        ordered_json out;
        out["seed"] = ctx.seed;
        out["config_hash"] = ctx.config_hash;
        out["Q"] = qj;
        f << out.dump(2) << "\n";
    }
    int exported = 0;
    for (size_t k = 0; k < counting.orbits.size(); ++k)
        for (size_t t = 0; t < counting.orbits[k].size(); ++t) {
            auto csv = ctx.open_csv("trajectory_" + std::to_string(exported++) + ".csv");
            csv << "s";
            for (int i = 0; i < problem.dim; ++i) csv << ",u" << (i + 1);
            csv << "\n";
            const auto& u = counting.orbits[k][t].u;
            for (int i = 0; i < u.space().n_s(); ++i) {
                csv << fmt(u.space().s_coord(i));
                for (int d = 0; d < problem.dim; ++d) csv << "," << fmt(u.values()(i, d));
                csv << "\n";
            }
        }
    j["trajectories_exported"] = exported;
    ctx.write_json("morse_summary.json", std::move(j));
    return 0;
}

int run_degen_validate(const RunContext& ctx, const std::string& path) {
    ctx.prepare();
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open structure file '" + path + "'", 0);
    nlohmann::json doc = nlohmann::json::parse(f);
    auto structure = degen::structure_from_json(doc);
    auto report = degen::validate_structure(structure);
    ordered_json j = degen::to_json(report);
    std::printf("%s\n", report.all_pass() ? "all axioms pass" : "axiom violations found");
    ctx.write_json("degen_report.json", std::move(j));
    return 0;
}

int run_sft(const RunContext& ctx, const std::string& orbits_path,
            const std::string& symbols_path) {
    ctx.prepare();
    sftsym::OrbitSymbolTable table;
    std::vector<sftsym::StandardWord> classes;
    if (orbits_path.empty()) {
        table.add({"a", 1, false, false});
        sftsym::StandardWord q, p, qp, hb;
        q.q_part = {{"a", 1}};
        p.p_part = {{"a", 1}};
        qp.q_part = {{"a", 1}};
        qp.p_part = {{"a", 1}};
        hb.hbar = 1;
        classes = {q, p, qp, hb};
    } else {
        std::ifstream f(orbits_path);
        if (!f) throw ConfigError("cannot open orbit file '" + orbits_path + "'", 0);
        nlohmann::json doc = nlohmann::json::parse(f);
        for (const auto& o : doc.at("orbits"))
            table.add({o.at("name").get<std::string>(), o.at("covering").get<int>(),
                       o.value("odd", false), o.value("troublesome", false)});
        std::ifstream g(symbols_path);
        if (!g) throw ConfigError("cannot open symbol file '" + symbols_path + "'", 0);
        nlohmann::json sdoc = nlohmann::json::parse(g);
        for (const auto& w : sdoc.at("classes")) {
            sftsym::StandardWord sw;
            sw.hbar = w.value("hbar", 0);
            for (const auto& t : w.value("q", nlohmann::json::array()))
                sw.q_part.emplace_back(t.at(0).get<std::string>(), t.at(1).get<int>());
            for (const auto& t : w.value("p", nlohmann::json::array()))
                sw.p_part.emplace_back(t.at(0).get<std::string>(), t.at(1).get<int>());
            classes.push_back(std::move(sw));
        }
    }
    auto induced = sftsym::induced_degeneration_structure(table, classes);
    ordered_json j;
    j["structure"] = degen::to_json(induced.structure);
    j["validation"] = degen::to_json(induced.report);
    // products printed in the hbar^{g-1} q.. p.. notation
    ordered_json prods;
    for (const auto& a : classes)
        for (const auto& b : classes) {
            auto prod = sftsym::multiply(table, sftsym::FormalSum({{a, 1}}),
                                         sftsym::FormalSum({{b, 1}}));
            prods[sftsym::to_string(a) + " . " + sftsym::to_string(b)] = sftsym::to_string(prod);
        }
    j["products"] = prods;
    ctx.write_json("sft_summary.json", std::move(j));
    return 0;
}

int run_algebra(const RunContext& ctx, const std::string& structure_path,
                const std::string& q_path) {
    ctx.prepare();
    std::ifstream f(structure_path);
    if (!f) throw ConfigError("cannot open structure file '" + structure_path + "'", 0);
    auto structure = degen::structure_from_json(nlohmann::json::parse(f));
    std::ifstream g(q_path);
    if (!g) throw ConfigError("cannot open counting file '" + q_path + "'", 0);
    nlohmann::json qdoc = nlohmann::json::parse(g);
    auto Q = algebra::CountingFunction::zeros(
        structure, qdoc.value("ring", "Z2") == "Z" ? algebra::Ring::Z : algebra::Ring::Z2);
    for (const auto& [label, value] : qdoc.at("values").items()) Q.set(label, value.get<long long>());
    if (qdoc.contains("parity"))
        for (const auto& [label, value] : qdoc.at("parity").items())
            Q.set_parity(label, value.get<int>());
    auto dq = algebra::dq_operator(Q);
    auto hom = algebra::dq_homology(dq, Q.parity);
    ordered_json j;
    j["squares_to_zero"] = dq.squares_to_zero;
    j["homology"] = {{"total", hom.total}, {"even", hom.even}, {"odd", hom.odd}};
    {
        auto csv = ctx.open_csv("homology.csv");
        csv << "grading,dimension\n";
        csv << "even," << hom.even << "\n";
        csv << "odd," << hom.odd << "\n";
        csv << "total," << hom.total << "\n";
    }
    ctx.write_json("algebra_summary.json", std::move(j));
    return 0;
}

int run_suite_cmd(const RunContext& ctx) {
    ctx.prepare();
    auto result = acceptance::run_suite(ctx.seed);
    for (const auto& c : result.criteria)
        std::printf("%s criterion %2d (%s)\n", c.pass ? "PASS" : "FAIL", c.number,
                    c.name.c_str());
    ctx.write_json("suite_summary.json",
                   acceptance::to_json(result, ctx.seed, ctx.config_hash));
    return result.all_pass() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"desk-scale laboratory for scale calculus, gluing and counting"};
    app.require_subcommand(1);

    RunContext ctx;
    apply_env_out(ctx);
    app.add_option("--out", ctx.out, "output directory (SCFRED_OUT overrides the default)");
    app.add_option("--seed", ctx.seed, "seed for randomized property runs");
    std::string config_path;
    app.add_option("--config", config_path, "plain-text configuration file");

    auto* space = app.add_subcommand("space", "scale space norms and embedding diagnostics");
    int budget = 21;
    space->add_option("--budget", budget, "singular values to report");

    auto* glue = app.add_subcommand("glue", "gluing / anti-gluing diagnostics");
    std::string profile = "exponential";
    double r = 0.5;
    bool diag = false;
    glue->add_option("--profile", profile, "exponential | logarithmic | reciprocal");
    glue->add_option("--r", r, "gluing parameter in (0, 1]");
    glue->add_flag("--diag", diag, "emit the per-node CSV");

    auto* germ_cmd = app.add_subcommand("germ", "contraction germ convergence logs");
    double germ_v = 0.25;
    germ_cmd->add_option("--v", germ_v, "parameter value");

    auto* morse_cmd = app.add_subcommand("morse", "critical points, orbits and counting");
    std::string problem = "double_well";
    morse_cmd->add_option("--problem", problem,
                          "cubic_1d | double_well | chain | single_min");

    auto* degen_cmd = app.add_subcommand("degen", "degeneration structure tools");
    auto* validate = degen_cmd->add_subcommand("validate", "validate a structure file");
    std::string degen_path;
    validate->add_option("file", degen_path, "structure JSON")->required();

    auto* sft = app.add_subcommand("sft", "symbol calculus and induced structures");
    std::string orbits_path, symbols_path;
    sft->add_option("--orbits", orbits_path, "orbit table JSON");
    sft->add_option("--symbols", symbols_path, "symbol class JSON");

    auto* alg = app.add_subcommand("algebra", "convolution algebra and homology");
    auto* hom = alg->add_subcommand("homology", "D_Q homology of a counting function");
    std::string alg_structure, alg_q;
    hom->add_option("structure", alg_structure, "structure JSON")->required();
    hom->add_option("Q", alg_q, "counting function JSON")->required();

    auto* suite = app.add_subcommand("suite", "run the acceptance battery");

    CLI11_PARSE(app, argc, argv);

    try {
        if (!config_path.empty()) {
            auto cfg = Config::parse_file(config_path);
            ctx.config_hash = cfg.hash();
            if (app.count("--seed") == 0 && cfg.has("run", "seed"))
                ctx.seed = static_cast<unsigned>(cfg.get_int("run", "seed"));
        }
        if (space->parsed()) return run_space(ctx, config_path, budget);
        if (glue->parsed()) return run_glue(ctx, profile, r, diag);
        if (germ_cmd->parsed()) return run_germ(ctx, germ_v, config_path);
        if (morse_cmd->parsed()) return run_morse(ctx, problem, config_path);
        if (degen_cmd->parsed() && validate->parsed()) return run_degen_validate(ctx, degen_path);
        if (sft->parsed()) return run_sft(ctx, orbits_path, symbols_path);
        if (alg->parsed() && hom->parsed()) return run_algebra(ctx, alg_structure, alg_q);
        if (suite->parsed()) return run_suite_cmd(ctx);
        std::fprintf(stderr, "no subcommand action\n");
        return 2;
    } catch (const ConfigError& e) {
        ordered_json err = {{"error", "config"}, {"message", e.what()}, {"line", e.line()},
                            {"key", e.key()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 2;
    } catch (const Error& e) {
        ordered_json err = {{"error", "run"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    } catch (const std::exception& e) {
        ordered_json err = {{"error", "unexpected"}, {"message", e.what()}};
        std::fprintf(stderr, "%s\n", err.dump().c_str());
        return 1;
    }
}
