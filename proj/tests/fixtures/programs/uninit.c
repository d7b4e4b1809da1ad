#include <stdio.h>
int main(void) {
  int values[4];
  values[0] = 1;
  if (values[2] > 0)
    puts("positive");
  return 0;
}
