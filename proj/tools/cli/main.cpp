#include <iostream>

#include "common.hpp"
#include "levdyn/errors.hpp"
#include "levdyn/workbench.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Stochastic leverage map workbench"};
    app.set_version_flag("--version", levdyn::version());
    app.require_subcommand(1);
    levdyn::cli::add_model_commands(app);
    levdyn::cli::add_data_commands(app);
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const levdyn::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
