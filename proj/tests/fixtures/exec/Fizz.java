public class Fizz {
    public static void main(String[] args) {
        StringBuilder out = new StringBuilder();
        for (int i = 1; i <= 15; i++) {
            if (i % 15 == 0) {
                out.append("FizzBuzz");
            } else if (i % 3 == 0) {
                out.append("Fizz");
            } else if (i % 5 == 0) {
                out.append("Buzz");
            } else {
                out.append(i);
            }
            out.append(' ');
        }
        System.out.println(out.toString().trim());
    }
}
