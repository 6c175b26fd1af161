#include "hawkesdiv/cli.hpp"

int main(int argc, char** argv) {
    return hawkesdiv::cli_main(argc, argv);
}
