#include "maxreg/maxreg.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <string>

int main(int argc, char** argv) {
    CLI::App app{"Numerical checks of maximal L_p regularity for non-autonomous forms"};
    app.require_subcommand(1);

    std::string config;
    std::string command;
    for (const char* name : {"check-hypotheses", "solve", "verify-maxreg", "sweep"}) {
        auto* sub = app.add_subcommand(name, std::string("run '") + name + "' on a JSON config");
        sub->add_option("config", config, "path to the JSON configuration")->required();
        sub->callback([&command, name]() { command = name; });
    }

    double alpha = 0.0, beta = 0.0, gamma = 0.0, p = 2.0, tau = 1.0;
    auto* dini = app.add_subcommand("dini", "classify a power-law modulus t^alpha");
    dini->add_option("--alpha", alpha, "Hoelder exponent of the modulus")->required();
    dini->add_option("--beta", beta, "interpolation index of the trial space")->default_val(0.0);
    dini->add_option("--gamma", gamma, "interpolation index of the test space")->default_val(0.0);
    dini->add_option("--p", p, "Lebesgue exponent")->default_val(2.0);
    dini->add_option("--tau", tau, "time horizon")->default_val(1.0);
    dini->callback([&command]() { command = "dini"; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : maxreg::exit_config;
    }

    if (command == "dini") {
        try {
            const auto d = maxreg::dini_classify(alpha, gamma, beta, p, tau);
            auto doc = maxreg::to_json(d);
            doc["admissible_zero_u0"] = maxreg::admissible(d, true);
            doc["admissible_nonzero_u0"] = maxreg::admissible(d, false);
            std::cout << doc.dump(2) << '\n';
            return maxreg::exit_ok;
        } catch (const maxreg::Error& e) {
            std::cerr << "error: " << e.what() << '\n';
            return maxreg::exit_config;
        }
    }
    const int code = maxreg::run_config(config, command);
    if (code == maxreg::exit_ok) {
        std::cout << command << ": report written\n";
    }
    return code;
}
