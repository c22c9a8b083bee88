// End-to-end tests of the installed command-line surface: exit codes, file
// formats, and determinism. Each test shells out to the real binary.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "opotk/squeezing.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = OPOTK_CLI_PATH;
const std::string kConfigDir = OPOTK_CONFIG_DIR;

fs::path scratch_root() {
    static const fs::path root = [] {
        fs::path p = fs::temp_directory_path() /
                     ("opotk-cli-" + std::to_string(::getpid()));
        fs::create_directories(p);
        return p;
    }();
    return root;
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = scratch_root() / name;
    fs::create_directories(dir);
    return dir;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

/// Runs the CLI with the given arguments, captures stdout+stderr into
/// `capture`, and returns the process exit code.
int run_cli(const std::string& args, std::string* capture = nullptr,
            const std::string& env_prefix = "") {
    const fs::path out = scratch_root() / "last_output.txt";
    std::string cmd = env_prefix + quoted(kCli) + " " + args + " > " +
                      quoted(out.string()) + " 2>&1";
    const int status = std::system(cmd.c_str());
    if (capture) {
        std::ifstream in(out);
        std::ostringstream buf;
        buf << in.rdbuf();
        *capture = buf.str();
    }
    REQUIRE(status != -1);
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string config_path(const std::string& name) {
    return (fs::path(kConfigDir) / name).string();
}

/// Minimal CSV reader for checking outputs: skips '#' lines, splits on commas.
struct SimpleCsv {
    std::vector<std::string> metadata;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

SimpleCsv parse_csv(const fs::path& path) {
    SimpleCsv csv;
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (line.front() == '#') {
            csv.metadata.push_back(line);
            continue;
        }
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (!have_header) {
            csv.columns = fields;
            have_header = true;
            continue;
        }
        std::vector<double> row;
        for (const auto& f : fields)
            row.push_back(std::stod(f));
        csv.rows.push_back(row);
    }
    return csv;
}

bool starts_with(const std::string& text, const std::string& prefix) {
    return text.rfind(prefix, 0) == 0;
}

} // namespace

TEST_SUITE("cli") {

TEST_CASE("help exits zero and names the subcommands") {
    std::string out;
    CHECK(run_cli("--help", &out) == 0);
    for (const char* name : {"scan", "spectrum", "sweep", "fit", "locksim", "report"})
        CHECK(out.find(name) != std::string::npos);
}

TEST_CASE("usage errors exit 2") {
    const auto dir = scratch_dir("usage");
    const std::string out_flag = " --output-dir " + quoted(dir.string());
    CHECK(run_cli("scan --step 0" + out_flag) == 2);
    CHECK(run_cli("scan --t-min 41 --t-max 39" + out_flag) == 2);
    CHECK(run_cli("sweep" + out_flag) == 2);
    CHECK(run_cli("spectrum --points 1" + out_flag) == 2);
    CHECK(run_cli("warp-drive") == 2);
    CHECK(run_cli("") == 2);
    CHECK(run_cli("scan --bogus-flag 1" + out_flag) == 2);
    CHECK(run_cli("fit --data x.csv --free charm" + out_flag) == 2);
    CHECK(run_cli("scan --config a.toml --config b.toml" + out_flag) == 2);
    CHECK(run_cli("scan --config /nonexistent/opo.toml" + out_flag) == 2);
    CHECK(run_cli("fit --data /nonexistent/data.csv") == 2);
}

TEST_CASE("domain errors exit 3") {
    const auto dir = scratch_dir("domain");
    const std::string out_flag = " --output-dir " + quoted(dir.string());
    CHECK(run_cli("spectrum --pump-mw 300" + out_flag) == 3);
    CHECK(run_cli("spectrum --pump-mw 283" + out_flag) == 3);
    CHECK(run_cli("sweep --powers-mw 10,300" + out_flag) == 3);
    CHECK(run_cli("locksim --duration-s 5" + out_flag) == 3);
}

TEST_CASE("spectrum writes the documented table") {
    const auto dir = scratch_dir("spectrum");
    std::string out;
    CHECK(run_cli("spectrum --output-dir " + quoted(dir.string()), &out) == 0);
    CHECK(out.find("wrote") != std::string::npos);
    CHECK(out.find("(201 rows)") != std::string::npos);

    const std::string text = read_file(dir / "spectrum.csv");
    CHECK(starts_with(text, "# label=No.1\n"
                            "# pump_mW=130.000000\n"
                            "freq_MHz,sq_dB,antisq_dB\n"));

    const SimpleCsv csv = parse_csv(dir / "spectrum.csv");
    REQUIRE(csv.rows.size() == 201);
    CHECK(csv.rows.front()[0] == 0.0);
    CHECK(csv.rows.back()[0] == doctest::Approx(200.0).epsilon(1e-12));
    // Squeezing recovers toward shot noise with frequency; anti-squeezing decays.
    CHECK(csv.rows.front()[1] < csv.rows.back()[1]);
    CHECK(csv.rows.front()[2] > csv.rows.back()[2]);
    CHECK(csv.rows.front()[1] < -7.0);
}

TEST_CASE("sweep writes one row per power with exact zeros at zero pump") {
    const auto dir = scratch_dir("sweep");
    CHECK(run_cli("sweep --powers-mw 0,20,65,130,200 --output-dir " +
                  quoted(dir.string())) == 0);

    const std::string text = read_file(dir / "pump_sweep.csv");
    CHECK(starts_with(text, "# freq_MHz=2.000000\n"
                            "# label=No.1\n"
                            "power_mW,x,sq_dB,antisq_dB\n"));
    CHECK(text.find("\n0,0,0,0\n") != std::string::npos);

    const SimpleCsv csv = parse_csv(dir / "pump_sweep.csv");
    REQUIRE(csv.rows.size() == 5);
    CHECK(csv.rows[3][0] == 130.0);
    CHECK(csv.rows[3][1] == doctest::Approx(0.677763939434058).epsilon(1e-12));
    CHECK(csv.rows[3][2] == doctest::Approx(-8.04619689523508).epsilon(1e-9));
    CHECK(csv.rows[3][3] == doctest::Approx(13.8924205079798).epsilon(1e-9));
    for (std::size_t i = 1; i < csv.rows.size(); ++i)
        CHECK(csv.rows[i][3] > csv.rows[i - 1][3]);
}

TEST_CASE("scan covers the requested temperature range") {
    const auto dir = scratch_dir("scan");
    CHECK(run_cli("scan --output-dir " + quoted(dir.string())) == 0);

    const std::string text = read_file(dir / "scan.csv");
    CHECK(starts_with(text, "# label=No.1\ntemperature_C,transmission,eta\n"));

    const SimpleCsv csv = parse_csv(dir / "scan.csv");
    REQUIRE(csv.rows.size() > 1000);
    CHECK(csv.rows.front()[0] == 38.0);
    CHECK(csv.rows.back()[0] == 42.0);
    double eta_max = 0.0;
    for (const auto& row : csv.rows)
        eta_max = std::max(eta_max, row[2]);
    CHECK(eta_max > 0.9999);
}

TEST_CASE("locksim is reproducible for a fixed seed") {
    const auto dir_a = scratch_dir("lock_a");
    const auto dir_b = scratch_dir("lock_b");
    const auto dir_c = scratch_dir("lock_c");
    CHECK(run_cli("locksim --seed 7 --duration-s 12 --output-dir " +
                  quoted(dir_a.string())) == 0);
    CHECK(run_cli("locksim --seed 7 --duration-s 12 --output-dir " +
                  quoted(dir_b.string())) == 0);
    CHECK(run_cli("locksim --seed 8 --duration-s 12 --output-dir " +
                  quoted(dir_c.string())) == 0);

    const std::string a = read_file(dir_a / "locksim.csv");
    CHECK(starts_with(a, "# label=No.1\n"
                         "# seed=7\n"
                         "time_s,temperature_C,detuning_Hz,phase_pp_rad,phase_plo_rad\n"));
    CHECK(a == read_file(dir_b / "locksim.csv"));
    CHECK(a != read_file(dir_c / "locksim.csv"));

    const auto summary = nlohmann::json::parse(read_file(dir_a / "locksim_summary.json"));
    CHECK(summary.at("acquired").get<bool>());
    CHECK(summary.at("seed").get<std::uint64_t>() == 7);
    CHECK(summary.at("duration_s").get<double>() == 12.0);
    const double t_cav = summary.at("t_lock_cavity_s").get<double>();
    const double t_pp = summary.at("t_lock_pump_probe_s").get<double>();
    const double t_plo = summary.at("t_lock_probe_lo_s").get<double>();
    CHECK(t_cav > 0.0);
    CHECK(t_pp > t_cav);
    CHECK(t_plo > t_pp);
    const double theta_deg = summary.at("theta_tilde_deg").get<double>();
    CHECK(theta_deg > 0.5);
    CHECK(theta_deg < 5.0);
}

TEST_CASE("fit recovers the parameters behind a synthetic data file") {
    const auto dir = scratch_dir("fit");
    const fs::path data_path = dir / "points.csv";

    opotk::SqueezingParams truth;
    truth.kappa = 0.968;
    truth.oc_t = 0.118;
    truth.loss_l = 0.008;
    truth.f0_hz = 82e6;
    truth.theta_tilde_rad = 2.0 * std::numbers::pi / 180.0;
    truth.p_threshold_w = 0.283;
    {
        std::ofstream out(data_path);
        out << "pump_mW,freq_MHz,quadrature,relative_dB\n";
        out.precision(17);
        for (const double p_mw : {20.0, 50.0, 90.0, 130.0, 180.0}) {
            const double x = opotk::pump_to_x(p_mw * 1e-3, truth.p_threshold_w);
            for (const int quad : {0, 1}) {
                const double r = opotk::variance_with_phase_noise(
                    quad == 0 ? opotk::Quadrature::Squeezed
                              : opotk::Quadrature::AntiSqueezed,
                    x, 2e6, truth);
                out << p_mw << ",2," << quad << "," << opotk::to_db(r) << "\n";
            }
        }
    }

    std::string out;
    CHECK(run_cli("fit --data " + quoted(data_path.string()), &out) == 0);
    const auto fit = nlohmann::json::parse(out);
    CHECK(std::abs(fit.at("theta_tilde_deg").get<double>() - 2.0) < 0.01);
    CHECK(fit.at("p_threshold_mW").get<double>() == 283.0);
    CHECK(fit.at("n_points").get<int>() == 10);
    CHECK(fit.at("converged").get<bool>());
    CHECK(fit.at("residual_rms_dB").get<double>() < 1e-6);
    CHECK(fit.at("free") == nlohmann::json::array({"theta"}));
    CHECK(fit.contains("theta_tilde_stderr_deg"));

    std::string joint_out;
    CHECK(run_cli("fit --data " + quoted(data_path.string()) +
                      " --free theta,p_threshold",
                  &joint_out) == 0);
    const auto joint = nlohmann::json::parse(joint_out);
    CHECK(std::abs(joint.at("theta_tilde_deg").get<double>() - 2.0) < 0.01);
    CHECK(std::abs(joint.at("p_threshold_mW").get<double>() - 283.0) < 283.0 * 0.005);
    CHECK(joint.at("free") == nlohmann::json::array({"theta", "p_threshold"}));
}

TEST_CASE("report compares the three shipped devices") {
    std::string out;
    const std::string cmd = "report --json --config " + quoted(config_path("opo1.toml")) +
                            " --config " + quoted(config_path("opo2.toml")) +
                            " --config " + quoted(config_path("opo3.toml"));
    CHECK(run_cli(cmd, &out) == 0);
    const auto rows = nlohmann::json::parse(out);
    REQUIRE(rows.size() == 3);

    CHECK(rows[0].at("label") == "No.1");
    CHECK(rows[1].at("label") == "No.2");
    CHECK(rows[2].at("label") == "No.3");
    CHECK(rows[0].at("p_threshold_mW").get<double>() == doctest::Approx(283.0));
    CHECK(rows[1].at("p_threshold_mW").get<double>() == doctest::Approx(92.0));
    CHECK(rows[2].at("p_threshold_mW").get<double>() == doctest::Approx(29.0));

    CHECK(rows[0].at("escape_efficiency").get<double>() ==
          doctest::Approx(0.936507936507937).epsilon(1e-9));
    CHECK(rows[1].at("escape_efficiency").get<double>() ==
          doctest::Approx(0.911111111111111).epsilon(1e-9));
    CHECK(rows[2].at("escape_efficiency").get<double>() ==
          doctest::Approx(0.846153846153846).epsilon(1e-9));

    // Propagation efficiency comes from the visibility triple here.
    CHECK(rows[0].at("squeezed_dB").get<double>() ==
          doctest::Approx(-8.05370854082771).epsilon(1e-6));
    CHECK(rows[0].at("anti_squeezed_dB").get<double>() ==
          doctest::Approx(13.8937591169211).epsilon(1e-6));
    CHECK(rows[1].at("squeezed_dB").get<double>() ==
          doctest::Approx(-6.5820198).epsilon(1e-6));
    CHECK(rows[2].at("squeezed_dB").get<double>() ==
          doctest::Approx(-6.046555).epsilon(1e-6));

    CHECK(rows[0].at("bandwidth_MHz").get<double>() ==
          doctest::Approx(137.576643033593).epsilon(1e-9));
    CHECK(rows[1].at("bandwidth_MHz").get<double>() ==
          doctest::Approx(95.546538).epsilon(1e-6));
    CHECK(rows[2].at("bandwidth_MHz").get<double>() ==
          doctest::Approx(49.856654).epsilon(1e-6));

    std::string text_out;
    CHECK(run_cli("report --config " + quoted(config_path("opo1.toml")), &text_out) == 0);
    CHECK(text_out.find("label") != std::string::npos);
    CHECK(text_out.find("No.1") != std::string::npos);

    std::string default_out;
    CHECK(run_cli("report", &default_out) == 0);
    CHECK(default_out.find("No.1") != std::string::npos);
}

TEST_CASE("config selection works after the subcommand name") {
    const auto dir = scratch_dir("fallthrough");
    CHECK(run_cli("scan --t-min 39.9 --t-max 40.1 --config " +
                  quoted(config_path("opo2.toml")) + " --output-dir " +
                  quoted(dir.string())) == 0);
    const std::string text = read_file(dir / "scan.csv");
    CHECK(starts_with(text, "# label=No.2\n"));
}

TEST_CASE("output directory precedence: flag over environment") {
    const auto env_dir = scratch_dir("env_dir");
    const auto flag_dir = scratch_dir("flag_dir");
    const std::string env_prefix =
        "OPOTK_OUTPUT_DIR=" + quoted(env_dir.string()) + " ";

    CHECK(run_cli("sweep --powers-mw 10 --out env_only.csv", nullptr, env_prefix) == 0);
    CHECK(fs::exists(env_dir / "env_only.csv"));

    CHECK(run_cli("sweep --powers-mw 10 --out flagged.csv --output-dir " +
                      quoted(flag_dir.string()),
                  nullptr, env_prefix) == 0);
    CHECK(fs::exists(flag_dir / "flagged.csv"));
    CHECK_FALSE(fs::exists(env_dir / "flagged.csv"));
}

TEST_CASE("scratch cleanup") {
    std::error_code ec;
    fs::remove_all(scratch_root(), ec);
    CHECK_FALSE(ec);
}

} // TEST_SUITE
