/*
 * Copyright (C) 2026 opinet contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <boost/program_options.hpp>

#include "opinet/config.hpp"
#include "opinet/errors.hpp"
#include "opinet/experiment.hpp"

namespace po = boost::program_options;

namespace
{

constexpr int exit_ok = 0;
constexpr int exit_config = 1;
constexpr int exit_runtime = 2;

void print_usage(std::ostream& os, const po::options_description& opts)
{
    os << "usage:\n"
          "  opinet run <config.ini> [--out DIR] [--seed N]\n"
          "  opinet run --preset NAME [--out DIR] [--seed N]\n"
          "  opinet sweep <config.ini> [--out DIR] [--seed N]\n"
          "  opinet sweep --preset NAME [--out DIR] [--seed N]\n"
          "  opinet presets [NAME]     list presets, or print one as a config file\n\n"
       << opts;
}

opinet::ExperimentConfig resolve_config(const po::variables_map& vm, const std::vector<std::string>& args)
{
    opinet::ExperimentConfig config;
    if (vm.count("preset")) {
        if (!args.empty()) {
            throw opinet::ConfigError("command line: give either a config file or --preset, not both");
        }
        config = opinet::preset(vm["preset"].as<std::string>());
    } else if (args.size() == 1) {
        config = opinet::load_config(args.front());
    } else {
        throw opinet::ConfigError("command line: expected exactly one config file");
    }
    if (vm.count("out")) {
        config.output_dir = vm["out"].as<std::string>();
    }
    if (vm.count("seed")) {
        config.seed = vm["seed"].as<std::uint64_t>();
    }
    config.validate();
    return config;
}

int run(int argc, char** argv)
{
    po::options_description opts("options");
    opts.add_options()("help,h", "show this message")("preset", po::value<std::string>(), "use a built-in preset")(
        "out", po::value<std::string>(), "output directory (overrides run.output_dir)")(
        "seed", po::value<std::uint64_t>(), "master seed (overrides run.seed)")(
        "quiet,q", "suppress progress messages");
    po::options_description hidden;
    hidden.add_options()("command", po::value<std::string>())("args", po::value<std::vector<std::string>>());
    po::options_description all;
    all.add(opts).add(hidden);
    po::positional_options_description pos;
    pos.add("command", 1).add("args", -1);

    po::variables_map vm;
    try {
        po::store(po::command_line_parser(argc, argv).options(all).positional(pos).run(), vm);
        po::notify(vm);
    } catch (const po::error& e) {
        throw opinet::ConfigError(std::string("command line: ") + e.what());
    }
    if (vm.count("help") || !vm.count("command")) {
        print_usage(vm.count("help") ? std::cout : std::cerr, opts);
        return vm.count("help") ? exit_ok : exit_config;
    }
    const std::string command = vm["command"].as<std::string>();
    const auto args = vm.count("args") ? vm["args"].as<std::vector<std::string>>() : std::vector<std::string>{};
    opinet::RunOptions ropt;
    ropt.log = vm.count("quiet") ? nullptr : &std::cerr;

    if (command == "presets") {
        if (args.empty()) {
            for (const auto& [name, make] : opinet::presets()) {
                std::cout << name << '\n';
            }
        } else {
            std::cout << opinet::serialize_config(opinet::preset(args.front()));
        }
        return exit_ok;
    }
    if (command == "run") {
        const auto config = resolve_config(vm, args);
        const auto report = opinet::run_experiment(config, ropt);
        for (const auto& [variant, fit] : report.fitted_rates) {
            std::cout << variant << "\trate=" << opinet::io::format_double(fit.rate)
                      << "\tfit_error=" << opinet::io::format_double(fit.fit_error) << '\n';
        }
        std::cout << "wrote " << config.output_dir.string() << '\n';
        return exit_ok;
    }
    if (command == "sweep") {
        const auto config = resolve_config(vm, args);
        const auto result = opinet::run_mu_sweep(config, ropt);
        std::cout << "wrote " << (config.output_dir / "rates.tsv").string() << '\n';
        for (const auto& f : result.failures) {
            std::cerr << "mu=" << opinet::io::format_double(f.mu) << " failed: " << f.message << '\n';
        }
        return result.failures.empty() ? exit_ok : exit_runtime;
    }
    throw opinet::ConfigError("command line: unknown command '" + command + "' (expected run, sweep or presets)");
}

} // namespace

int main(int argc, char** argv)
{
    try {
        return run(argc, argv);
    } catch (const opinet::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_runtime;
    }
}
