#include "prpo/cli_io.hpp"

int main(int argc, char** argv)
{
    return prpo::cli_main(argc, argv);
}
