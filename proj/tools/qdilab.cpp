#include <qdi/cli.hpp>

int main( int argc, char** argv )
{
  return qdi::cli::run( argc, argv );
}
