#include "klucrl/experiment.hpp"

#include "klucrl/kl_opt.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace klucrl {

namespace {

namespace fs = std::filesystem;

constexpr const char* kSweepHeader = "epsilon,q1_kl,q2_kl,q3_kl,q1_l1,q2_l1,q3_l1";

std::string first_data_line(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open " + path, 0);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        return line;
    }
    throw CsvError("no data in " + path, 0);
}

std::string meta_value(const std::vector<std::pair<std::string, std::string>>& meta,
                       const std::string& key) {
    for (const auto& [k, v] : meta)
        if (k == key) return v;
    throw std::runtime_error("plot: CSV metadata is missing key '" + key + "'");
}

void emit_regret_plots(const std::string& csv_path, bool bounds, const fs::path& out) {
    const RegretCsv csv = parse_regret_csv(csv_path);
    if (csv.rows.empty()) throw CsvError("no data rows in " + csv_path, 0);

    // algorithm -> t -> regrets across replications
    std::map<std::string, std::map<long, std::vector<double>>> grouped;
    for (const auto& row : csv.rows) grouped[row.algorithm][row.t].push_back(row.regret);

    std::vector<std::string> dat_files;
    for (const auto& [algo, by_t] : grouped) {
        const std::string dat = (out / ("regret_mean_" + algo + ".dat")).string();
        std::ofstream o(dat, std::ios::binary);
        o << "# t mean_regret stderr\n";
        for (const auto& [t, values] : by_t) {
            const double n = static_cast<double>(values.size());
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= n;
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            const double se = n > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
            o << t << ' ' << format_double(mean) << ' ' << format_double(se) << "\n";
        }
        dat_files.push_back("regret_mean_" + algo + ".dat");
    }

    bool have_t2 = false;
    if (bounds) {
        const int S = std::stoi(meta_value(csv.metadata, "n_states"));
        const int A = std::stoi(meta_value(csv.metadata, "n_actions"));
        const double diameter = std::stod(meta_value(csv.metadata, "diameter"));
        const double delta = std::stod(meta_value(csv.metadata, "delta"));
        std::optional<double> margin;
        for (const auto& [k, v] : csv.metadata)
            if (k == "margin") margin = std::stod(v);

        std::vector<long> grid;
        for (const auto& [t, _] : grouped.begin()->second)
            if (t > 5) grid.push_back(t);
        const BoundCurves curves = theorem_bound_curve(S, A, diameter, delta, grid, margin);
        std::ofstream o((out / "bound_theorem.dat").string(), std::ios::binary);
        o << "# t theorem1" << (curves.theorem2 ? " theorem2" : "") << "\n";
        for (std::size_t i = 0; i < grid.size(); ++i) {
            o << grid[i] << ' ' << format_double(curves.theorem1[i]);
            if (curves.theorem2) o << ' ' << format_double((*curves.theorem2)[i]);
            o << "\n";
        }
        have_t2 = curves.theorem2.has_value();
    }

    std::ofstream gp((out / "plot_regret.gp").string(), std::ios::binary);
    gp << "#!/usr/bin/env gnuplot\n"
       << "# mean cumulative regret with standard-error bars\n"
       << "set terminal pngcairo size 960,640\n"
       << "set output 'regret.png'\n"
       << "set xlabel 't'\n"
       << "set ylabel 'cumulative regret'\n"
       << "set key top left\n";
    gp << "plot ";
    bool first = true;
    for (const auto& f : dat_files) {
        if (!first) gp << ", \\\n     ";
        const auto base = f.substr(12, f.size() - 16); // regret_mean_<algo>.dat
        gp << "'" << f << "' using 1:2:3 with yerrorlines title '" << base << "'";
        first = false;
    }
    if (bounds) {
        gp << ", \\\n     'bound_theorem.dat' using 1:2 with lines title 'Theorem 1 bound'";
        if (have_t2)
            gp << ", \\\n     'bound_theorem.dat' using 1:3 with lines title 'Theorem 2 bound'";
    }
    gp << "\n";
}

void emit_sweep_plots(const std::string& csv_path, const fs::path& out) {
    // validate the body before writing the script
    std::ifstream in(csv_path, std::ios::binary);
    std::string line;
    long line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string field;
        int count = 0;
        while (std::getline(ss, field, ',')) {
            std::size_t pos = 0;
            try {
                (void)std::stod(field, &pos);
            } catch (const std::exception&) {
                throw CsvError("malformed numeric field '" + field + "'", line_no);
            }
            if (pos != field.size()) throw CsvError("malformed numeric field '" + field + "'", line_no);
            ++count;
        }
        if (count != 7) throw CsvError("expected 7 fields", line_no);
    }

    const std::string csv_name = fs::path(csv_path).filename().string();
    if (fs::absolute(fs::path(csv_path)).parent_path() != fs::absolute(out))
        fs::copy_file(csv_path, out / csv_name, fs::copy_options::overwrite_existing);

    std::ofstream gp((out / "plot_sweep.gp").string(), std::ios::binary);
    gp << "#!/usr/bin/env gnuplot\n"
       << "# solver evolution: maximizer coordinates as the radius shrinks\n"
       << "set terminal pngcairo size 960,720\n"
       << "set output 'sweep.png'\n"
       << "set datafile separator ','\n"
       << "set logscale x\n"
       << "set xrange [*:*] reverse\n"
       << "set xlabel 'epsilon'\n"
       << "set multiplot layout 2,1\n"
       << "set ylabel 'q (KL ball)'\n"
       << "plot '" << csv_name << "' using 1:2 with lines title 'q1', \\\n"
       << "     '" << csv_name << "' using 1:3 with lines title 'q2', \\\n"
       << "     '" << csv_name << "' using 1:4 with lines title 'q3'\n"
       << "set ylabel 'q (L1 ball)'\n"
       << "plot '" << csv_name << "' using 1:5 with lines title 'q1', \\\n"
       << "     '" << csv_name << "' using 1:6 with lines title 'q2', \\\n"
       << "     '" << csv_name << "' using 1:7 with lines title 'q3'\n"
       << "unset multiplot\n";
}

} // namespace

void emit_plots(const std::string& csv_path, bool bounds, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    const std::string header = first_data_line(csv_path);
    if (header == kSweepHeader)
        emit_sweep_plots(csv_path, out);
    else
        emit_regret_plots(csv_path, bounds, out);
}

std::string sweep_demo(const std::string& out_dir) {
    fs::create_directories(out_dir);
    const std::string path = (fs::path(out_dir) / "sweep_demo.csv").string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");

    const SimplexVector p(std::vector<double>{0.3, 0.7, 0.0});
    const std::vector<double> value{1.0, 2.0, 3.0};

    out << "# p = 0.3 0.7 0\n"
        << "# V = 1 2 3\n"
        << "# l1_radius = sqrt(2*epsilon)\n"
        << kSweepHeader << "\n";

    constexpr int kPoints = 300;
    const double eps_hi = 0.5;
    const double eps_lo = 1.0 / 500.0;
    for (int i = 0; i < kPoints; ++i) {
        const double f = static_cast<double>(i) / (kPoints - 1);
        const double eps = eps_hi * std::pow(eps_lo / eps_hi, f); // decreasing sweep
        const SimplexVector q_kl = max_kl(p, value, eps).q;
        const SimplexVector q_l1 = max_l1(p, value, std::sqrt(2.0 * eps));
        out << format_double(eps);
        for (std::size_t j = 0; j < 3; ++j) out << ',' << format_double(q_kl[j]);
        for (std::size_t j = 0; j < 3; ++j) out << ',' << format_double(q_l1[j]);
        out << "\n";
    }
    return path;
}

} // namespace klucrl
