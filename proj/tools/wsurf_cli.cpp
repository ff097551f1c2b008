// wsurf: command-line front end for the Weingarten surface toolkit.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "wsurf/io.hpp"
#include "wsurf/linear_class.hpp"
#include "wsurf/parallel.hpp"
#include "wsurf/pipeline.hpp"

using nlohmann::json;
using namespace wsurf;

namespace {

struct RunConfig {
    std::string in, out, format = "csv";
    std::optional<int> row;
    std::optional<double> alpha, beta, gamma, delta;
    double a = 0.0;
    std::string grid, origin = "0,0";
    std::optional<double> tol;
    std::optional<int> order;
    // generate
    std::string kind = "named", name, pair, gauge = "1,1,0";
    std::vector<std::string> params;
    double curve_kappa = 1.0, curve_tau = 0.0;
    std::optional<double> kappa1;
    double kappa0 = 2.0, kappa_prime0 = 0.0, nu0 = 1.0, nu_prime0 = 0.0, du = 1e-4;
};

bool log_enabled() {
    const char* v = std::getenv("WSURF_LOG");
    return v && (std::string(v) == "info" || std::string(v) == "debug");
}

void log(const std::string& msg) {
    if (log_enabled()) std::cerr << "[wsurf] " << msg << "\n";
}

std::vector<double> split_numbers(const std::string& text, std::size_t n, const std::string& flag) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument(tok);
        } catch (const std::exception&) {
            throw UsageError(flag + " expects " + std::to_string(n) + " comma-separated numbers, got '" + text + "'");
        }
    }
    if (out.size() != n) throw UsageError(flag + " expects " + std::to_string(n) + " comma-separated numbers, got '" + text + "'");
    return out;
}

GridSpec grid_from(const RunConfig& c) {
    const auto g = split_numbers(c.grid, 4, "--grid");
    const auto o = split_numbers(c.origin, 2, "--origin");
    if (g[0] != std::floor(g[0]) || g[1] != std::floor(g[1])) throw UsageError("--grid node counts must be integers");
    GridSpec s{int(g[0]), int(g[1]), o[0], o[1], g[2], g[3]};
    s.validate();
    return s;
}

void require(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string(flag) + " is required");
}

json grid_json(const GridSpec& s) {
    return {{"nu", s.n0}, {"nv", s.n1}, {"u0", s.x0}, {"v0", s.y0}, {"du", s.h0}, {"dv", s.h1}};
}

json residual_json(const ResidualField& r) { return {{"maxAbs", r.maxAbs}, {"l2", r.l2}}; }

json summary(const Scalar2D& v) {
    double lo = v.data().front(), hi = lo, sum = 0.0;
    for (double x : v.data()) {
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        sum += x;
    }
    return {{"min", lo}, {"max", hi}, {"mean", sum / double(v.data().size())}};
}

json relation_json(const LinearRelation& r) {
    return {{"alpha", r.alpha}, {"beta", r.beta}, {"gamma", r.gamma}, {"delta", r.delta}};
}

json class_json(const BasicClassId& id) {
    json j = {{"row", id.row}, {"reduced", relation_json(id.reduced)}};
    if (id.beta) j["beta"] = *id.beta;
    if (id.gamma) j["gamma"] = *id.gamma;
    json red = {{"epsilon", id.reduction.epsilon}};
    if (id.reduction.offset) red["offset"] = *id.reduction.offset;
    if (id.reduction.scale) red["scale"] = *id.reduction.scale;
    j["reduction"] = red;
    const auto p = basic_pde(id);
    j["pde"] = {{"operator", operator_symbol(p.kind)}, {"equation", p.equation}, {"substitution", p.substitution}};
    return j;
}

BasicClassId row_class(const RunConfig& c) {
    if (!c.row) throw UsageError("--row is required");
    return exemplar_class(*c.row, c.beta, c.gamma);
}

std::string surface_text(const SurfaceGrid& g, const std::string& format) {
    if (format == "csv") return io::format_surface(g);
    if (format == "obj") return io::format_obj(g);
    json pts = json::array();
    for (int i = 0; i < g.spec().n0; ++i)
        for (int j = 0; j < g.spec().n1; ++j) pts.push_back({g(i, j).x(), g(i, j).y(), g(i, j).z()});
    return json{{"grid", grid_json(g.spec())}, {"points", pts}}.dump() + "\n";
}

std::string field_text(const ScalarField2D& f, const std::string& format) {
    if (format == "csv") return io::format_field(f);
    if (format == "obj") throw UsageError("fields cannot be exported as OBJ");
    json vals = json::array();
    for (int i = 0; i < f.grid.n0; ++i)
        for (int j = 0; j < f.grid.n1; ++j) vals.push_back(f(i, j));
    return json{{"grid", grid_json(f.grid)}, {"values", vals}}.dump() + "\n";
}

void report_error(const Error& e) {
    std::string msg = e.what();
    if (msg.rfind(e.name() + ": ", 0) == 0) msg.erase(0, e.name().size() + 2);
    std::cerr << json{{"error", e.name()}, {"message", msg}}.dump() << "\n";
}

void emit(const json& report, const std::string& path) {
    const std::string text = report.dump(2) + "\n";
    if (!path.empty()) io::detail::write_file(path, text);
    std::cout << text;
}

// ---------------------------------------------------------------- commands

json cmd_analyze(const RunConfig& c) {
    require(c.in, "--in");
    const auto grid = io::read_surface(c.in);
    log("analyzing " + c.in);
    GeometryOptions go;
    go.allow_umbilics = true;
    if (c.tol) go.tol_principal = *c.tol;
    const auto forms = second_fundamental_form(grid, go);
    const auto cf = curvature_field(forms, go);
    json rep = {{"command", "analyze"}, {"grid", grid_json(grid.spec())}};
    rep["curvature"] = {{"nu1", summary(cf.nu1)}, {"nu2", summary(cf.nu2)}, {"K", summary(cf.K)},
                        {"H", summary(cf.H)},     {"Hprime", summary(cf.Hprime)}};
    const auto umb = umbilic_scan(cf, go.tol_umbilic);
    json ul = json::array();
    for (std::size_t k = 0; k < umb.size() && k < 100; ++k) ul.push_back({umb[k].first, umb[k].second});
    rep["umbilics"] = {{"count", umb.size()}, {"nodes", ul}};
    if (umb.empty()) {
        const auto [c1, c2] = codazzi_residual(cf, forms);
        rep["codazzi"] = {residual_json(c1), residual_json(c2)};
        rep["gauss"] = residual_json(gauss_residual(cf, forms));
        const auto nat = naturality_check(forms, cf);
        rep["naturality"] = {{"mean", nat.mean}, {"defect", nat.defect}};
    } else {
        rep["codazzi"] = nullptr;
        rep["gauss"] = nullptr;
        rep["naturality"] = nullptr;
    }
    const auto fit = fit_relation(cf);
    json jf = relation_json(fit.relation);
    jf["residual"] = fit.residual;
    jf["gap"] = fit.gap;
    jf["nodes"] = fit.nodes;
    // Coefficients below 1e-3 are treated as zero before classifying.
    LinearRelation snapped = fit.relation;
    for (double* x : {&snapped.alpha, &snapped.beta, &snapped.gamma, &snapped.delta})
        if (std::abs(*x) < 1e-3) *x = 0.0;
    try {
        jf["class"] = class_json(classify(snapped));
    } catch (const Error& e) {
        jf["class"] = {{"error", e.name()}, {"message", e.what()}};
    }
    rep["fit"] = jf;
    return rep;
}

json cmd_classify(const RunConfig& c) {
    const LinearRelation r{c.alpha.value_or(0.0), c.beta.value_or(0.0), c.gamma.value_or(0.0), c.delta.value_or(0.0)};
    json rep = {{"command", "classify"}, {"relation", relation_json(r)}};
    rep["class"] = class_json(classify(r));
    return rep;
}

json cmd_generate(const RunConfig& c) {
    require(c.out, "--out");
    json rep = {{"command", "generate"}, {"kind", c.kind}};
    std::optional<SurfaceGrid> surf;
    const auto go = detail::surface_check_options();
    if (c.kind == "named") {
        require(c.name, "--name");
        SurfaceParams params;
        for (const auto& kv : c.params) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw UsageError("--param expects key=value, got '" + kv + "'");
            params[kv.substr(0, eq)] = split_numbers(kv.substr(eq + 1), 1, "--param")[0];
        }
        surf = named_surface(c.name, params, grid_from(c));
        rep["name"] = c.name;
    } else if (c.kind == "gamma") {
        const double k = c.curve_kappa, t = c.curve_tau;
        SpaceCurveSpec curve{[k](double) { return k; }, [t](double) { return t; }};
        MeridianSpec m;
        if (c.kappa1) {
            const double k1 = *c.kappa1;
            m.kappa1 = [k1](double) { return k1; };
        } else {
            if (!c.beta) throw UsageError("gamma surfaces need --kappa1 or --beta with --kappa0");
            const auto g = grid_from(c);
            const auto mc = meridian_curvature_ode(*c.beta, c.kappa0, c.kappa_prime0, g.x_max() + 4.0 * 1e-3, 1e-3);
            m.kappa1 = [mc](double s) { return mc(s); };
            rep["first_integral_drift"] = mc.first_integral_drift;
        }
        surf = gamma_surface(curve, m, grid_from(c));
        const auto cf = curvature_field(*surf, go);
        double dev = 0.0;
        for (int i = 1; i < surf->spec().n0 - 1; ++i)
            for (int j = 1; j < surf->spec().n1 - 1; ++j)
                dev = std::max(dev, std::abs(std::abs(cf.nu1(i, j)) - std::abs(m.kappa1(surf->spec().x(i)))));
        rep["nu1_vs_kappa1"] = dev;
        if (c.beta && !c.kappa1) {
            const double q = (*c.beta + 1.0) / (*c.beta - 1.0);
            double worst = 0.0;
            for (int i = 1; i < surf->spec().n0 - 1; ++i)
                for (int j = 1; j < surf->spec().n1 - 1; ++j)
                    worst = std::max(worst, std::abs(cf.nu1(i, j) / cf.nu2(i, j) - q));
            rep["ratio"] = {{"target", q}, {"max_error", worst}};
        }
    } else if (c.kind == "rotational") {
        if (!c.beta) throw UsageError("rotational surfaces need --beta");
        const auto g = grid_from(c);
        const auto sol = rotational_natural_ode(*c.beta, c.nu0, c.nu_prime0, g.x_max() + 4.0 * c.du, c.du, true);
        surf = rotational_basic45(*c.beta, sol, g);
        const auto cf = curvature_field(*surf, go);
        const double q = (*c.beta + 1.0) / (*c.beta - 1.0);
        double worst = 0.0, g1 = 0.0;
        for (int i = 1; i < g.n0 - 1; ++i)
            for (int j = 1; j < g.n1 - 1; ++j) {
                worst = std::max(worst, std::abs(cf.nu1(i, j) / cf.nu2(i, j) - q));
                g1 = std::max(g1, std::abs(cf.gamma1(i, j)));
            }
        rep["ratio"] = {{"target", q}, {"max_error", worst}};
        rep["gamma1_max"] = g1;
        rep["energy_drift"] = sol.energy_drift;
    } else if (c.kind == "reconstruct") {
        require(c.in, "--in");
        require(c.pair, "--pair");
        const std::string spec = c.pair.front() == '@' ? io::detail::read_file(c.pair.substr(1)) : c.pair;
        json pj;
        try {
            pj = json::parse(spec);
        } catch (const json::exception& e) {
            throw ParseError(std::string("--pair: ") + e.what());
        }
        const auto pair = io::pair_from_json(pj);
        const auto gv = split_numbers(c.gauge, 3, "--gauge");
        const auto field = io::read_field(c.in);
        NuField nu(field.grid);
        nu.values = field.values;
        ReconstructOptions opt;
        if (c.tol) opt.tol_pde = *c.tol;
        const auto rec = reconstruct_surface(pair, NaturalGauge{gv[0], gv[1], gv[2]}, nu, opt);
        surf = rec.grid;
        rep["pde_residual"] = rec.pde_residual;
        rep["compatibility_defect"] = rec.compatibility_defect;
        rep["frame_drift"] = rec.frame_drift;
    } else {
        throw UsageError("--kind must be named, gamma, rotational or reconstruct");
    }
    rep["grid"] = grid_json(surf->spec());
    rep["extent"] = surf->extent();
    io::detail::write_file(c.out, surface_text(*surf, c.format));
    rep["output"] = c.out;
    return rep;
}

json cmd_parallel(const RunConfig& c) {
    require(c.in, "--in");
    require(c.out, "--out");
    const auto grid = io::read_surface(c.in);
    const auto off = offset_surface(grid, c.a);
    GeometryOptions go;
    go.tol_principal = c.tol.value_or(1e-6);
    const auto cf = curvature_field(grid, go);
    // The discrete offset carries O(h^2) mixed terms.
    go.tol_principal = std::max(go.tol_principal, 1e-2);
    const auto cfo = curvature_field(off.grid, go);
    double err = 0.0;
    const GridSpec& s = grid.spec();
    for (int i = 2; i < s.n0 - 2; ++i)
        for (int j = 2; j < s.n1 - 2; ++j) {
            const auto pc = parallel_principal_curvatures(cf.nu1(i, j), cf.nu2(i, j), c.a);
            // Compare as unordered pairs up to the orientation of the offset grid.
            const double x = std::min(std::abs(cfo.nu1(i, j) - pc.nu1) + std::abs(cfo.nu2(i, j) - pc.nu2),
                                      std::abs(cfo.nu1(i, j) + pc.nu2) + std::abs(cfo.nu2(i, j) + pc.nu1));
            err = std::max(err, x);
        }
    io::detail::write_file(c.out, surface_text(off.grid, c.format));
    return {{"command", "parallel"},
            {"a", c.a},
            {"epsilon", off.offset.epsilon},
            {"grid", grid_json(s)},
            {"curvature_transport_error", err},
            {"output", c.out}};
}

json cmd_residual(const RunConfig& c) {
    require(c.in, "--in");
    const auto id = row_class(c);
    const auto p = basic_pde(id);
    const auto field = io::read_field(c.in);
    const int order = c.order.value_or(exemplar_order(id.row));
    const auto r = pde_residual(p, field, OperatorOptions{order});
    return {{"command", "residual"}, {"class", class_json(id)}, {"order", order},
            {"margin", r.margin},    {"residual", residual_json(r)}, {"grid", grid_json(field.grid)}};
}

json cmd_solve(const RunConfig& c) {
    require(c.out, "--out");
    const auto id = row_class(c);
    const auto p = basic_pde(id);
    std::optional<ScalarField2D> exact;
    ScalarField2D data = [&] {
        if (!c.in.empty()) return io::read_field(c.in);
        exact = row_exemplar(id, c.grid.empty() ? exemplar_grid(id.row) : grid_from(c)).field;
        return *exact;
    }();
    const GridSpec& g = data.grid;
    json rep = {{"command", "solve"}, {"class", class_json(id)}, {"grid", grid_json(g)}};
    ScalarField2D sol(g);
    NewtonOptions newton;
    if (c.tol) newton.tol_residual = *c.tol;
    if (p.kind == OperatorKind::laplace || p.kind == OperatorKind::star_bar) {
        const int order = c.order.value_or(2);
        const auto res = solve_elliptic(p, data, harmonic_extension(data), EllipticOptions{newton, order});
        sol = res.field;
        rep["method"] = "elliptic";
        rep["order"] = order;
        rep["newton"] = {{"iterations", res.report.iterations}, {"residual_history", res.report.residual_history}};
    } else {
        if (g.n1 < 3) throw UsageError("hyperbolic solves need at least three y-levels of data");
        std::vector<double> line(g.n0), line_dy(g.n0);
        for (int i = 0; i < g.n0; ++i) {
            line[i] = data(i, 0);
            line_dy[i] = (-3.0 * data(i, 0) + 4.0 * data(i, 1) - data(i, 2)) / (2.0 * g.h1);
        }
        // Halve the y-step until the march satisfies CFL, then sample back onto the data grid.
        for (int m = 1;; m *= 2) {
            try {
                const auto res = solve_hyperbolic(p, line, line_dy, g.x0, g.h0, g.h1 / m, (g.n1 - 1) * m);
                for (int i = 0; i < g.n0; ++i)
                    for (int j = 0; j < g.n1; ++j) sol(i, j) = res.field(i, j * m);
                rep["substeps"] = m;
                if (!res.energy.empty()) rep["energy_drift"] = res.energy_drift;
                break;
            } catch (const CFLError&) {
                if (m >= 64) throw;
            }
        }
        rep["method"] = "hyperbolic";
    }
    rep["residual"] = residual_json(pde_residual(p, sol));
    if (exact) {
        // Hyperbolic marches only determine the domain of dependence of the initial line.
        double cmax = 0.0;
        if (rep["method"] == "hyperbolic") {
            if (p.kind == OperatorKind::wave) cmax = 1.0;
            else
                for (double v : exact->values.data()) cmax = std::max(cmax, std::abs(p.w(v)));
        }
        double err = 0.0;
        for (int i = 0; i < g.n0; ++i)
            for (int j = 0; j < g.n1; ++j) {
                const double reach = cmax * j * g.h1;
                if (i * g.h0 < reach || (g.n0 - 1 - i) * g.h0 < reach) continue;
                err = std::max(err, std::abs(sol(i, j) - (*exact)(i, j)));
            }
        rep["max_error_vs_exemplar"] = err;
    }
    io::detail::write_file(c.out, field_text(sol, c.format));
    rep["output"] = c.out;
    return rep;
}

json cmd_export(const RunConfig& c) {
    require(c.in, "--in");
    require(c.out, "--out");
    const auto grid = io::read_surface(c.in);
    io::detail::write_file(c.out, surface_text(grid, c.format));
    return {{"command", "export"}, {"format", c.format}, {"grid", grid_json(grid.spec())}, {"output", c.out}};
}

json cmd_pipeline(const RunConfig& c) {
    require(c.out, "--out");
    const auto id = row_class(c);
    const auto grid = c.grid.empty() ? exemplar_grid(id.row) : grid_from(c);
    std::error_code ec;
    std::filesystem::create_directories(c.out, ec);
    if (ec) throw IOError("cannot create directory '" + c.out + "': " + ec.message());
    const auto dir = std::filesystem::path(c.out);
    log("row " + std::to_string(id.row) + ": exemplar field");
    const auto ex = row_exemplar(id, grid);
    io::write_field((dir / "field.txt").string(), ex.field);
    log("row " + std::to_string(id.row) + ": surface");
    const auto s = row_surface(ex);
    io::write_surface((dir / "surface.txt").string(), s.grid);
    io::write_obj((dir / "surface.obj").string(), s.grid);
    const auto& p = ex.pde;
    json rep = {{"command", "pipeline"}, {"class", class_json(id)}};
    rep["pde_text"] = std::string(operator_symbol(p.kind)) + " form: " + p.equation + "   [" + p.substitution + "]";
    rep["field"] = {{"source", ex.source}, {"grid", grid_json(grid)}, {"order", ex.order},
                    {"residual", residual_json(ex.residual)}, {"file", "field.txt"}};
    json js = {{"method", s.method}, {"curvature_error", s.curvature_error}, {"extent", s.grid.extent()},
               {"files", {"surface.txt", "surface.obj"}}};
    if (s.method == "reconstruct") {
        js["pair"] = s.pair.kind;
        js["gauge"] = {{"a", s.gauge.a}, {"b", s.gauge.b}, {"nu0", s.gauge.nu0}};
        js["natural_residual_before_polish"] = s.natural_residual;
        js["compatibility_defect"] = s.compatibility_defect;
        js["frame_drift"] = s.frame_drift;
    } else {
        js["relation_residual"] = s.relation_residual;
    }
    rep["surface"] = js;
    io::detail::write_file((dir / "report.json").string(), rep.dump(2) + "\n");
    return rep;
}

// ---------------------------------------------------------------- config

/// Appends "--key value" for config entries whose flag is absent from argv.
std::vector<std::string> apply_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end()) return args;
    if (it + 1 == args.end()) throw UsageError("--config needs a file");
    const std::string path = *(it + 1);
    args.erase(it, it + 2);
    json cfg;
    try {
        cfg = json::parse(io::detail::read_file(path));
    } catch (const json::exception& e) {
        throw ParseError("config '" + path + "': " + e.what());
    }
    if (!cfg.is_object()) throw ParseError("config '" + path + "' must hold a JSON object");
    const std::set<std::string> present(args.begin(), args.end());
    auto scalar = [&](const std::string& key, const json& v) -> std::string {
        if (v.is_string()) return v.get<std::string>();
        if (v.is_number() || v.is_boolean()) return v.dump();
        throw ParseError("config key '" + key + "' must hold a string, number or array of those");
    };
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (present.count(flag)) continue;
        if (value.is_array()) {
            for (const auto& v : value) {
                args.push_back(flag);
                args.push_back(scalar(key, v));
            }
        } else {
            args.push_back(flag);
            args.push_back(scalar(key, value));
        }
    }
    return args;
}

void add_common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--in", c.in, "Input file");
    sub->add_option("--out", c.out, "Output file or directory");
}

void add_row(CLI::App* sub, RunConfig& c) {
    sub->add_option("--row", c.row, "Basic class row 1..10");
    sub->add_option("--beta", c.beta, "Row parameter beta");
    sub->add_option("--gamma", c.gamma, "Row parameter gamma");
}

void add_grid(CLI::App* sub, RunConfig& c) {
    sub->add_option("--grid", c.grid, "nx,ny,dx,dy");
    sub->add_option("--origin", c.origin, "u0,v0 (default 0,0)");
}

void add_format(CLI::App* sub, RunConfig& c) {
    sub->add_option("--format", c.format, "csv, json or obj")->check(CLI::IsMember({"csv", "json", "obj"}));
}

} // namespace

int main(int argc, char** argv) {
    RunConfig c;
    CLI::App app{"Weingarten surface toolkit", "wsurf_cli"};
    app.require_subcommand(1);
    app.add_option("--config", "JSON file with default flag values");

    auto* analyze = app.add_subcommand("analyze", "Curvature, residual and relation-fit report for a surface file");
    add_common(analyze, c);
    analyze->add_option("--tol", c.tol, "Principal-parameter tolerance on |F|, |M|");

    auto* classify_cmd = app.add_subcommand("classify", "Basic class of delta K = alpha H + beta H' + gamma");
    classify_cmd->add_option("--alpha", c.alpha);
    classify_cmd->add_option("--beta", c.beta);
    classify_cmd->add_option("--gamma", c.gamma);
    classify_cmd->add_option("--delta", c.delta);
    classify_cmd->add_option("--out", c.out, "Report file");

    auto* generate = app.add_subcommand("generate", "Named, class-Gamma, rotational or reconstructed surface");
    add_common(generate, c);
    add_grid(generate, c);
    add_format(generate, c);
    generate->add_option("--kind", c.kind, "named, gamma, rotational or reconstruct")
        ->check(CLI::IsMember({"named", "gamma", "rotational", "reconstruct"}));
    generate->add_option("--name", c.name, "Named surface");
    generate->add_option("--param", c.params, "Named surface parameter key=value");
    generate->add_option("--curve-kappa", c.curve_kappa, "Curvature of c2 (constant)");
    generate->add_option("--curve-tau", c.curve_tau, "Torsion of c2 (constant)");
    generate->add_option("--kappa1", c.kappa1, "Constant meridian curvature");
    generate->add_option("--beta", c.beta, "Rotational class parameter");
    generate->add_option("--kappa0", c.kappa0, "kappa1(0) for the meridian ODE");
    generate->add_option("--kappa-prime0", c.kappa_prime0, "kappa1'(0) for the meridian ODE");
    generate->add_option("--nu0", c.nu0, "nu(0) for the rotational ODE");
    generate->add_option("--nu-prime0", c.nu_prime0, "nu'(0) for the rotational ODE");
    generate->add_option("--du", c.du, "Rotational ODE step");
    generate->add_option("--pair", c.pair, "Pair JSON, or @file");
    generate->add_option("--gauge", c.gauge, "a,b,nu0");
    generate->add_option("--tol", c.tol, "Natural PDE residual tolerance for reconstruct");

    auto* parallel = app.add_subcommand("parallel", "Parallel surface at distance --a");
    add_common(parallel, c);
    add_format(parallel, c);
    parallel->add_option("--a", c.a, "Offset distance")->required();
    parallel->add_option("--tol", c.tol, "Principal-parameter tolerance for the input");

    auto* residual = app.add_subcommand("residual", "Residual of a row equation on a field file");
    add_common(residual, c);
    add_row(residual, c);
    residual->add_option("--order", c.order, "Stencil order 2, 4 or 6");

    auto* solve = app.add_subcommand("solve", "Solve a row equation from boundary or initial data");
    add_common(solve, c);
    add_row(solve, c);
    add_grid(solve, c);
    add_format(solve, c);
    solve->add_option("--order", c.order, "Elliptic stencil order 2 or 4");
    solve->add_option("--tol", c.tol, "Newton residual tolerance");

    auto* exp = app.add_subcommand("export", "Convert a surface file");
    add_common(exp, c);
    add_format(exp, c);

    auto* pipeline = app.add_subcommand("pipeline", "Row equation, exemplar field, residual and surface");
    add_common(pipeline, c);
    add_row(pipeline, c);
    add_grid(pipeline, c);

    try {
        std::vector<std::string> args(argv, argv + argc);
        args = apply_config(std::move(args));
        std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
        app.parse(rev);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const Error& e) {
        report_error(e);
        return e.exit_code();
    }

    try {
        json rep;
        if (analyze->parsed()) rep = cmd_analyze(c);
        else if (classify_cmd->parsed()) rep = cmd_classify(c);
        else if (generate->parsed()) rep = cmd_generate(c);
        else if (parallel->parsed()) rep = cmd_parallel(c);
        else if (residual->parsed()) rep = cmd_residual(c);
        else if (solve->parsed()) rep = cmd_solve(c);
        else if (exp->parsed()) rep = cmd_export(c);
        else if (pipeline->parsed()) rep = cmd_pipeline(c);
        const bool report_to_file = analyze->parsed() || classify_cmd->parsed() || residual->parsed();
        emit(rep, report_to_file ? c.out : std::string());
        return 0;
    } catch (const Error& e) {
        report_error(e);
        return e.exit_code();
    } catch (const json::exception& e) {
        std::cerr << json{{"error", "ParseError"}, {"message", e.what()}}.dump() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "InternalError"}, {"message", e.what()}}.dump() << "\n";
        return 3;
    }
}
